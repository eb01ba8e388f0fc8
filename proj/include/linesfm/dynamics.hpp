#pragma once

#include <Eigen/Core>

#include "linesfm/geometry.hpp"

namespace linesfm {

using Mat3 = Eigen::Matrix3d;
/// Interaction matrix: couples the free chi components (1/m) to h-dot (1/s).
/// Entries carry m/s, scaled by the dimensionless B(h).
using OmegaMatrix = Eigen::Matrix<double, 2, 3>;

/// Camera twist: nu in m/s, omega in rad/s, both in the camera frame.
struct CameraVelocity {
  Vec3 nu = Vec3::Zero();
  Vec3 omega = Vec3::Zero();

  bool is_finite() const { return nu.allFinite() && omega.allFinite(); }
};

struct LineRates {
  Vec3 d_dot;
  Vec3 h_dot;
  double depth_dot = 0.0;
};

struct ReducedRates {
  Vec3 h_dot;
  Vec2 chi_free_dot;
};

/// [v]_x with [v]_x w = v x w.
Mat3 skew(const Vec3& v);

/// Rates of the binormalized coordinates under camera motion.
LineRates full_dynamics(const PluckerLine& line, const CameraVelocity& vel);

/// chi-dot = omega x chi - chi * nu.(chi x h). Requires chi.h = 0.
Vec3 chi_dynamics_full(const Vec3& chi, const Vec3& h, const CameraVelocity& vel);

/// Unknown-state dynamics f_u on the free components, with the eliminated
/// component substituted from chi.h = 0.
Vec2 chi_free_dynamics(const Vec3& h, const Vec2& chi_free, Axis axis,
                       const CameraVelocity& vel);

/// (h-dot, free chi-dot) in the reduced coordinates.
ReducedRates reduced_dynamics(const ReducedState& state, const CameraVelocity& vel);

/// The dimensionless 2x3 factor B(h) with Omega = (nu.h) B(h). For Z:
///   [ -hx hy/hz       hz + hx^2/hz  -hy ]
///   [ -hz - hy^2/hz   hx hy/hz       hx ]
OmegaMatrix omega_basis(const Vec3& h, Axis axis);

OmegaMatrix omega_matrix(const Vec3& h, const Vec3& nu, Axis axis);

/// Omega of the un-reduced system, -(nu.h)[h]_x. Rank <= 2 for every input.
Mat3 full_omega(const Vec3& h, const Vec3& nu);

/// One RK4 step of the true line under a constant twist.
PluckerLine integrate_line(const PluckerLine& line, const CameraVelocity& vel, double dt);

}  // namespace linesfm
