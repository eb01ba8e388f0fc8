#include "linesfm/observer.hpp"

#include "linesfm/errors.hpp"
#include "linesfm/integrate.hpp"

namespace linesfm {

GainMatrix gain_matrix(const OmegaMatrix& omega, const ObserverGains& gains) {
  const auto g = compute_gain<double>(omega, gains.alpha, gains.d2);
  GainMatrix out;
  out.H = g.H;
  out.sigma = Vec2(g.sigma[1], g.sigma[0]);
  out.excitation_lost = out.sigma[0] < kExcitationTol;
  return out;
}

namespace {

using Packed = Eigen::Matrix<double, 5, 1>;

// Everything in the observer that depends only on the held inputs.
struct HeldInputs {
  Vec3 h;
  Axis axis;
  CameraVelocity vel;
  OmegaMatrix omega;
  Mat3 H;
  Vec3 rotation_term;
  double alpha;
};

HeldInputs hold(const Vec3& h_meas, Axis axis, const CameraVelocity& vel,
                const ObserverGains& gains) {
  if (!(gains.alpha > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "observer gain alpha must be positive");
  }
  HeldInputs in{h_meas, axis, vel, omega_matrix(h_meas, vel.nu, axis), Mat3::Zero(),
                vel.omega.cross(h_meas), gains.alpha};
  in.H = gain_matrix(in.omega, gains).H;
  return in;
}

Packed rates(const HeldInputs& in, const Packed& x) {
  const Vec3 h_hat = x.head<3>();
  const Vec2 chi_hat = x.tail<2>();
  const Vec3 innovation = in.h - h_hat;
  Packed out;
  out.head<3>() = in.rotation_term + in.omega.transpose() * chi_hat + in.H * innovation;
  out.tail<2>() = chi_free_dynamics(in.h, chi_hat, in.axis, in.vel) +
                  in.alpha * in.omega * innovation;
  return out;
}

}  // namespace

ObserverRates observer_derivative(const ObserverState& obs, const Vec3& h_meas,
                                  const CameraVelocity& vel, const ObserverGains& gains) {
  const HeldInputs in = hold(h_meas, obs.axis, vel, gains);
  Packed x;
  x << obs.h_hat, obs.chi_hat;
  const Packed r = rates(in, x);
  return {r.head<3>(), r.tail<2>()};
}

ObserverState observer_step(const ObserverState& obs, const Vec3& h_meas,
                            const CameraVelocity& vel, const ObserverGains& gains,
                            double dt) {
  if (dt < 0.0) throw Error(ErrorKind::InvalidInput, "negative time step");
  if (dt == 0.0) return obs;
  const HeldInputs in = hold(h_meas, obs.axis, vel, gains);
  Packed x;
  x << obs.h_hat, obs.chi_hat;
  const Packed next = rk4_step(x, dt, [&in](const Packed& s) { return rates(in, s); });
  return {next.head<3>(), next.tail<2>(), obs.axis};
}

ObserverState initialize_observer(const Vec3& h_meas, const Vec2& chi_hat, Axis axis) {
  return {h_meas, chi_hat, axis};
}

}  // namespace linesfm
