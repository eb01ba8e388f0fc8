#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include "linesfm/dynamics.hpp"

namespace linesfm {

/// Estimate of (h, chi_free). h_hat is not renormalized while integrating;
/// its norm drift is absorbed by the innovation term.
struct ObserverState {
  Vec3 h_hat;
  Vec2 chi_hat;
  Axis axis = Axis::Z;
};

struct ObserverGains {
  double alpha = 2000.0;  // gain on the unknown-state innovation, > 0
  double d2 = 1.0;        // gain on the direction of h not excited by Omega

  bool operator==(const ObserverGains&) const = default;
};

/// H = V blockdiag(D1, D2) V^T with D1 = diag(2 sqrt(alpha) sigma_i).
///
/// We use the standard factorization Omega = U S V^T. H only depends on the
/// right-singular subspaces: flipping the sign of a column of V leaves
/// v v^T unchanged, and when sigma_1 = sigma_2 D1 is a multiple of the
/// identity on that subspace, so any orthonormal basis of it gives the same H.
template <typename Scalar>
struct GainMatrixT {
  Eigen::Matrix<Scalar, 3, 3> H;
  Eigen::Matrix<Scalar, 2, 1> sigma;  // singular values of Omega, descending
  Eigen::Matrix<Scalar, 3, 3> V;      // right-singular vectors, matching sigma
};

template <typename Scalar>
GainMatrixT<Scalar> compute_gain(const Eigen::Matrix<Scalar, 2, 3>& omega, Scalar alpha,
                                 Scalar d2) {
  using std::sqrt;
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, 2, 3>> svd(omega, Eigen::ComputeFullV);
  GainMatrixT<Scalar> out;
  out.sigma = svd.singularValues();
  out.V = svd.matrixV();
  const Scalar c = Scalar(2) * sqrt(alpha);
  Eigen::Matrix<Scalar, 3, 1> diag;
  diag << c * out.sigma[0], c * out.sigma[1], d2;
  out.H = out.V * diag.asDiagonal() * out.V.transpose();
  // Symmetrize away rounding in the triple product.
  out.H = (Scalar(0.5) * (out.H + out.H.transpose())).eval();
  return out;
}

/// Linearized estimation-error dynamics for frozen Omega:
///   d/dt [h~; chi~] = [ -H  Omega^T ; -alpha Omega  0 ] [h~; chi~].
template <typename Scalar>
Eigen::Matrix<Scalar, 5, 5> error_dynamics_matrix(const Eigen::Matrix<Scalar, 2, 3>& omega,
                                                  const Eigen::Matrix<Scalar, 3, 3>& H,
                                                  Scalar alpha) {
  Eigen::Matrix<Scalar, 5, 5> a = Eigen::Matrix<Scalar, 5, 5>::Zero();
  a.template topLeftCorner<3, 3>() = -H;
  a.template topRightCorner<3, 2>() = omega.transpose();
  a.template bottomLeftCorner<2, 3>() = -alpha * omega;
  return a;
}

struct GainMatrix {
  Mat3 H;
  Vec2 sigma;  // singular values of Omega, ascending (sigma_1 <= sigma_2)
  bool excitation_lost = false;  // sigma_1 ~ 0: H only positive semidefinite
};

inline constexpr double kExcitationTol = 1e-9;

GainMatrix gain_matrix(const OmegaMatrix& omega, const ObserverGains& gains);

struct ObserverRates {
  Vec3 h_hat_dot;
  Vec2 chi_hat_dot;
};

/// Observer right-hand side. Omega, the h-dynamics feed-forward and f_u are
/// all evaluated at the measured h; only the innovation uses h_hat.
ObserverRates observer_derivative(const ObserverState& obs, const Vec3& h_meas,
                                  const CameraVelocity& vel, const ObserverGains& gains);

/// One RK4 step with h_meas and vel held over [t, t + dt].
ObserverState observer_step(const ObserverState& obs, const Vec3& h_meas,
                            const CameraVelocity& vel, const ObserverGains& gains,
                            double dt);

/// h_hat starts at the measurement.
ObserverState initialize_observer(const Vec3& h_meas, const Vec2& chi_hat, Axis axis);

}  // namespace linesfm
