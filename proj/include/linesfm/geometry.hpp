#pragma once

#include <array>
#include <Eigen/Core>
#include <Eigen/Geometry>

namespace linesfm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat32 = Eigen::Matrix<double, 3, 2>;

// Library-wide tolerances.
inline constexpr double kConstructionTol = 1e-12;
inline constexpr double kKleinTol = 1e-9;         // |d.h| accepted by binormalize
inline constexpr double kEliminationTol = 1e-6;   // min |h[axis]| for elimination
inline constexpr double kDepthOverflowTol = 1e-9; // min |chi| before depth -> inf

enum class Axis : int { X = 0, Y = 1, Z = 2 };

const char* to_string(Axis axis) noexcept;
inline int index(Axis axis) noexcept { return static_cast<int>(axis); }

/// The two coordinates kept after eliminating `axis`, in ascending order.
std::array<int, 2> free_indices(Axis axis) noexcept;

/// Axis of the largest |h| component (ties resolved toward the lower index).
Axis dominant_axis(const Vec3& h) noexcept;

/// Plücker coordinates (u, m), defined up to a common scale.
struct HomogeneousLine {
  Vec3 u;
  Vec3 m;
};

/// Binormalized Plücker line: unit direction d, depth l > 0 (meters) and the
/// unit normal h of the interpretation plane. n = l*h is the Euclidean moment.
struct PluckerLine {
  Vec3 d;
  double depth = 1.0;
  Vec3 h;

  Vec3 moment() const { return depth * h; }

  /// Stacked [d; l*h].
  Vec6 coordinates() const;

  /// chi = d / l, in 1/m.
  Vec3 chi() const { return d / depth; }

  /// Closest point to the optical center.
  Vec3 closest_point() const { return d.cross(moment()); }

  bool satisfies_invariants(double tol = kConstructionTol) const;
};

/// Measurable h plus the two free components of chi; the third component is
/// implied by chi.h = 0.
struct ReducedState {
  Vec3 h;
  Vec2 chi_free;
  Axis axis = Axis::Z;
};

/// n = p x d for any point p on the line.
Vec3 moment_from_point(const Vec3& p, const Vec3& d);

/// Throws InvalidLine for a zero direction or off-quadric input and
/// DegenerateLine for a zero moment.
PluckerLine binormalize(const HomogeneousLine& line);

/// Line through `p` with direction `d` (any nonzero length).
PluckerLine line_from_point_direction(const Vec3& p, const Vec3& d);

/// The image observable: the interpretation-plane normal.
inline Vec3 project(const PluckerLine& line) { return line.h; }

/// 3x2 map from the free components to full chi on the plane chi.h = 0.
/// Throws EliminationSingularity when |h[axis]| < kEliminationTol.
Mat32 elimination_basis(const Vec3& h, Axis axis);

/// Reconstructs full chi from its free components.
Vec3 expand_chi(const Vec3& h, const Vec2& chi_free, Axis axis);

/// Extracts the free components of a full chi vector.
Vec2 free_part(const Vec3& chi, Axis axis);

/// Reduce with the axis picked from the line's own h.
ReducedState reduce(const PluckerLine& line);

/// Reduce with a pre-selected axis (used when the axis is fixed for a run).
ReducedState reduce(const PluckerLine& line, Axis axis);

/// Inverse of reduce. Throws EliminationSingularity or DepthOverflow.
PluckerLine recover(const ReducedState& state);

}  // namespace linesfm
