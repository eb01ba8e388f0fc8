#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

#include "linesfm/dynamics.hpp"

namespace linesfm {

using Mat2 = Eigen::Matrix2d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Eigen-structure of Omega Omega^T and the Jacobian of its eigenvalues
/// with respect to the linear velocity.
struct EigenAnalysis {
  Vec2 sigma_sq = Vec2::Zero();  // ascending
  Mat2 eigvecs = Mat2::Identity();  // column i pairs with sigma_sq[i]
  bool has_eigvecs = true;  // false for multi-line aggregates
  Mat23 j_nu = Mat23::Zero();  // row i = d sigma_i^2 / d nu
};

struct ControlGains {
  double k1 = 1.0;
  double k2 = 1.0;
  Vec2 sigma_des_sq{0.1, 0.2};
  double damping = 1e-6;  // pseudo-inverse damping lambda

  bool operator==(const ControlGains&) const = default;
};

/// Omega Omega^T = (nu.h)^2 B B^T, so d(Omega Omega^T)/d nu_k = 2 (nu.h) h_k B B^T
/// and J_i = [v_i^T d(Omega Omega^T)/d nu_k v_i]_k.
///
/// When sigma_1^2 = sigma_2^2 the eigenvectors are not unique. `previous`
/// (the last step's basis) is then kept; otherwise it only fixes signs so
/// that each v_i points the same way as before. Any orthonormal basis
/// gives the same J in the repeated case: B B^T restricted to the
/// eigenspace is a multiple of the identity, and the derivative above is a
/// scalar multiple of B B^T.
EigenAnalysis eigen_analysis(const Vec3& h, const Vec3& nu, Axis axis,
                             const std::optional<Mat2>& previous = std::nullopt);

/// Mean of the per-line eigenvalues and Jacobians. Throws InvalidInput on
/// an empty list.
EigenAnalysis aggregate_multiline(std::span<const EigenAnalysis> per_line);

/// Damped Moore-Penrose inverse J^T (J J^T + lambda^2 I)^-1, computed through
/// the SVD. Singular values well above lambda are inverted to ~lambda^2/s^2
/// relative accuracy.
Eigen::Matrix<double, 3, 2> damped_pseudo_inverse(const Mat23& j, double lambda);

/// Numerical rank of J (singular values above `tol`).
int jacobian_rank(const Mat23& j, double tol = 1e-9);

/// nu-dot = k1 J^+ (sigma_des^2 - sigma^2) - k2 (I - J^+ J) nu. The null-space
/// term damps the part of nu that cannot change the eigenvalues.
Vec3 velocity_rate(const EigenAnalysis& analysis, const Vec3& nu, const ControlGains& gains);

/// One explicit Euler step of velocity_rate.
Vec3 velocity_command(const EigenAnalysis& analysis, const Vec3& nu,
                      const ControlGains& gains, double dt);

/// omega = (nu.h) chi_hat: zeroes h-dot when chi_hat equals the true chi.
inline Vec3 compensating_angular_velocity(const Vec3& h, const Vec3& nu,
                                          const Vec3& chi_hat_full) {
  return nu.dot(h) * chi_hat_full;
}

}  // namespace linesfm
