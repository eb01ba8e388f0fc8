#include "linesfm/control.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "linesfm/errors.hpp"

namespace linesfm {

namespace {

// Relative eigen-gap below which sigma_1^2 and sigma_2^2 count as repeated.
constexpr double kRepeatedGap = 1e-9;

}  // namespace

EigenAnalysis eigen_analysis(const Vec3& h, const Vec3& nu, Axis axis,
                             const std::optional<Mat2>& previous) {
  const OmegaMatrix basis = omega_basis(h, axis);
  const Mat2 bbt = basis * basis.transpose();
  const double s = nu.dot(h);

  Eigen::SelfAdjointEigenSolver<Mat2> solver(s * s * bbt);
  EigenAnalysis out;
  out.sigma_sq = solver.eigenvalues();
  out.eigvecs = solver.eigenvectors();

  const double scale = std::max(std::abs(out.sigma_sq[1]), 1e-300);
  const bool repeated = (out.sigma_sq[1] - out.sigma_sq[0]) <= kRepeatedGap * scale;
  if (previous) {
    if (repeated) {
      out.eigvecs = *previous;
    } else {
      for (int i = 0; i < 2; ++i) {
        if (out.eigvecs.col(i).dot(previous->col(i)) < 0.0) {
          out.eigvecs.col(i) = -out.eigvecs.col(i);
        }
      }
    }
  }

  for (int i = 0; i < 2; ++i) {
    const auto v = out.eigvecs.col(i);
    const double quad = v.dot(bbt * v);
    for (int k = 0; k < 3; ++k) {
      out.j_nu(i, k) = 2.0 * s * h[k] * quad;
    }
  }
  return out;
}

EigenAnalysis aggregate_multiline(std::span<const EigenAnalysis> per_line) {
  if (per_line.empty()) {
    throw Error(ErrorKind::InvalidInput, "cannot aggregate an empty set of lines");
  }
  EigenAnalysis out;
  out.sigma_sq.setZero();
  out.j_nu.setZero();
  for (const auto& a : per_line) {
    out.sigma_sq += a.sigma_sq;
    out.j_nu += a.j_nu;
  }
  const double n = static_cast<double>(per_line.size());
  out.sigma_sq /= n;
  out.j_nu /= n;
  if (per_line.size() == 1) {
    out.eigvecs = per_line.front().eigvecs;
    out.has_eigvecs = per_line.front().has_eigvecs;
  } else {
    out.has_eigvecs = false;
  }
  return out;
}

Eigen::Matrix<double, 3, 2> damped_pseudo_inverse(const Mat23& j, double lambda) {
  Eigen::JacobiSVD<Mat23> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec2 s = svd.singularValues();
  Eigen::Matrix<double, 3, 2> inv_sigma = Eigen::Matrix<double, 3, 2>::Zero();
  for (int i = 0; i < 2; ++i) {
    inv_sigma(i, i) = s[i] / (s[i] * s[i] + lambda * lambda);
  }
  return svd.matrixV() * inv_sigma * svd.matrixU().transpose();
}

int jacobian_rank(const Mat23& j, double tol) {
  Eigen::JacobiSVD<Mat23> svd(j);
  const Vec2 s = svd.singularValues();
  return static_cast<int>((s.array() > tol).count());
}

Vec3 velocity_rate(const EigenAnalysis& analysis, const Vec3& nu, const ControlGains& gains) {
  const Eigen::Matrix<double, 3, 2> pinv = damped_pseudo_inverse(analysis.j_nu, gains.damping);
  const Mat3 null_projector = Mat3::Identity() - pinv * analysis.j_nu;
  return gains.k1 * pinv * (gains.sigma_des_sq - analysis.sigma_sq) -
         gains.k2 * null_projector * nu;
}

Vec3 velocity_command(const EigenAnalysis& analysis, const Vec3& nu,
                      const ControlGains& gains, double dt) {
  return nu + dt * velocity_rate(analysis, nu, gains);
}

}  // namespace linesfm
