#include "linesfm/geometry.hpp"

#include <cmath>
#include <string>

#include "linesfm/errors.hpp"

namespace linesfm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidLine: return "invalid-line";
    case ErrorKind::DegenerateLine: return "degenerate-line";
    case ErrorKind::EliminationSingularity: return "elimination-singularity";
    case ErrorKind::DepthOverflow: return "depth-overflow";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Generation: return "generation";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

const char* to_string(Axis axis) noexcept {
  switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

std::array<int, 2> free_indices(Axis axis) noexcept {
  switch (axis) {
    case Axis::X: return {1, 2};
    case Axis::Y: return {0, 2};
    case Axis::Z: break;
  }
  return {0, 1};
}

Axis dominant_axis(const Vec3& h) noexcept {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(h[i]) > std::abs(h[best])) best = i;
  }
  return static_cast<Axis>(best);
}

Vec6 PluckerLine::coordinates() const {
  Vec6 out;
  out << d, depth * h;
  return out;
}

bool PluckerLine::satisfies_invariants(double tol) const {
  return std::abs(d.norm() - 1.0) <= tol && std::abs(h.norm() - 1.0) <= tol &&
         std::abs(d.dot(h)) <= tol && depth > 0.0 && std::isfinite(depth);
}

Vec3 moment_from_point(const Vec3& p, const Vec3& d) { return p.cross(d); }

PluckerLine binormalize(const HomogeneousLine& line) {
  const double u_norm = line.u.norm();
  if (!(u_norm > 0.0) || !std::isfinite(u_norm)) {
    throw Error(ErrorKind::InvalidLine, "line direction is zero or not finite");
  }
  const double m_norm = line.m.norm();
  if (!(m_norm > 0.0)) {
    throw Error(ErrorKind::DegenerateLine,
                "zero moment: the line contains the optical center");
  }
  PluckerLine out;
  out.d = line.u / u_norm;
  out.h = line.m / m_norm;
  out.depth = m_norm / u_norm;
  if (std::abs(out.d.dot(out.h)) > kKleinTol) {
    throw Error(ErrorKind::InvalidLine,
                "direction and moment are not orthogonal (|d.h| = " +
                    std::to_string(std::abs(out.d.dot(out.h))) + ")");
  }
  return out;
}

PluckerLine line_from_point_direction(const Vec3& p, const Vec3& d) {
  const double d_norm = d.norm();
  if (!(d_norm > 0.0)) {
    throw Error(ErrorKind::InvalidLine, "line direction is zero");
  }
  const Vec3 unit = d / d_norm;
  return binormalize({unit, moment_from_point(p, unit)});
}

Mat32 elimination_basis(const Vec3& h, Axis axis) {
  const int k = index(axis);
  if (std::abs(h[k]) < kEliminationTol) {
    throw Error(ErrorKind::EliminationSingularity,
                std::string("|h_") + to_string(axis) + "| = " +
                    std::to_string(std::abs(h[k])) + " below elimination tolerance");
  }
  const auto [a, b] = free_indices(axis);
  Mat32 basis = Mat32::Zero();
  basis(a, 0) = 1.0;
  basis(b, 1) = 1.0;
  basis(k, 0) = -h[a] / h[k];
  basis(k, 1) = -h[b] / h[k];
  return basis;
}

Vec3 expand_chi(const Vec3& h, const Vec2& chi_free, Axis axis) {
  const int k = index(axis);
  if (std::abs(h[k]) < kEliminationTol) {
    // Raise the same diagnostic as elimination_basis.
    (void)elimination_basis(h, axis);
  }
  const auto [a, b] = free_indices(axis);
  Vec3 chi;
  chi[a] = chi_free[0];
  chi[b] = chi_free[1];
  chi[k] = -(chi_free[0] * h[a] + chi_free[1] * h[b]) / h[k];
  return chi;
}

Vec2 free_part(const Vec3& chi, Axis axis) {
  const auto [a, b] = free_indices(axis);
  return {chi[a], chi[b]};
}

ReducedState reduce(const PluckerLine& line) {
  return reduce(line, dominant_axis(line.h));
}

ReducedState reduce(const PluckerLine& line, Axis axis) {
  return {line.h, free_part(line.chi(), axis), axis};
}

PluckerLine recover(const ReducedState& state) {
  // Elimination is invariant to the scale of h, so unnormalized estimates
  // are accepted.
  const Vec3 h = state.h.normalized();
  const Vec3 chi = expand_chi(h, state.chi_free, state.axis);
  const double chi_norm = chi.norm();
  if (chi_norm < kDepthOverflowTol) {
    throw Error(ErrorKind::DepthOverflow, "|chi| ~ 0: line at infinite depth");
  }
  PluckerLine out;
  out.depth = 1.0 / chi_norm;
  out.d = chi / chi_norm;
  out.h = h;
  return out;
}

}  // namespace linesfm
