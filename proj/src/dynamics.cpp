#include "linesfm/dynamics.hpp"

#include "linesfm/integrate.hpp"

namespace linesfm {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

LineRates full_dynamics(const PluckerLine& line, const CameraVelocity& vel) {
  const Vec3 d_cross_h = line.d.cross(line.h);
  LineRates rates;
  rates.d_dot = vel.omega.cross(line.d);
  rates.h_dot = vel.omega.cross(line.h) - (vel.nu.dot(line.h) / line.depth) * d_cross_h;
  rates.depth_dot = vel.nu.dot(d_cross_h);
  return rates;
}

Vec3 chi_dynamics_full(const Vec3& chi, const Vec3& h, const CameraVelocity& vel) {
  return vel.omega.cross(chi) - chi * vel.nu.dot(chi.cross(h));
}

Vec2 chi_free_dynamics(const Vec3& h, const Vec2& chi_free, Axis axis,
                       const CameraVelocity& vel) {
  const Vec3 chi = expand_chi(h, chi_free, axis);
  return free_part(chi_dynamics_full(chi, h, vel), axis);
}

ReducedRates reduced_dynamics(const ReducedState& state, const CameraVelocity& vel) {
  const OmegaMatrix omega = omega_matrix(state.h, vel.nu, state.axis);
  ReducedRates rates;
  rates.h_dot = vel.omega.cross(state.h) + omega.transpose() * state.chi_free;
  rates.chi_free_dot = chi_free_dynamics(state.h, state.chi_free, state.axis, vel);
  return rates;
}

OmegaMatrix omega_basis(const Vec3& h, Axis axis) {
  // h-dot = omega x h + (nu.h) [h]_x chi and chi = E chi_free, so
  // Omega^T = (nu.h) [h]_x E.
  return (skew(h) * elimination_basis(h, axis)).transpose();
}

OmegaMatrix omega_matrix(const Vec3& h, const Vec3& nu, Axis axis) {
  return nu.dot(h) * omega_basis(h, axis);
}

Mat3 full_omega(const Vec3& h, const Vec3& nu) { return -nu.dot(h) * skew(h); }

PluckerLine integrate_line(const PluckerLine& line, const CameraVelocity& vel, double dt) {
  using State = Eigen::Matrix<double, 7, 1>;
  State x;
  x << line.d, line.h, line.depth;
  const auto f = [&vel](const State& s) {
    const PluckerLine at{s.segment<3>(0), s[6], s.segment<3>(3)};
    const LineRates r = full_dynamics(at, vel);
    State out;
    out << r.d_dot, r.h_dot, r.depth_dot;
    return out;
  };
  const State next = rk4_step(x, dt, f);
  return {next.segment<3>(0), next[6], next.segment<3>(3)};
}

}  // namespace linesfm
