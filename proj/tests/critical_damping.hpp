#pragma once

// Poles of the linearized observer error dynamics, computed in 50-digit
// arithmetic. The critically damped design places a defective double pole
// at -sqrt(alpha) sigma_i; in double precision the discriminant of each
// block is lost to rounding and the pole only resolves to ~sqrt(eps) times
// its magnitude.
//
// The 5x5 error matrix is rotated into the singular bases of Omega
// (h~ = V a, chi~ = U b), where it splits into one 2x2 block per singular
// direction plus the unexcited direction of h. Each block is solved in
// closed form.

#include <algorithm>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/SVD>

#include "linesfm/dynamics.hpp"
#include "linesfm/observer.hpp"

namespace oracle {

using mp = boost::multiprecision::cpp_bin_float_50;

struct PoleCheck {
  double max_imag = 0.0;        // largest |Im| over the poles of the blocks
  double max_pole_error = 0.0;  // largest |Re - (-sqrt(alpha) sigma_i)| / (1 + sqrt(alpha) sigma_i)
  double max_coupling = 0.0;    // largest entry linking different directions
};

inline PoleCheck check_critical_damping(const linesfm::OmegaMatrix& omega, double alpha,
                                        double d2) {
  using Eigen::Matrix;
  using boost::multiprecision::abs;
  using boost::multiprecision::sqrt;
  const Matrix<mp, 2, 3> o = omega.cast<mp>();
  const auto gain = linesfm::compute_gain<mp>(o, mp(alpha), mp(d2));
  const Matrix<mp, 5, 5> a = linesfm::error_dynamics_matrix<mp>(o, gain.H, mp(alpha));

  Eigen::JacobiSVD<Matrix<mp, 2, 3>> svd(o, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix<mp, 5, 5> t = Matrix<mp, 5, 5>::Zero();
  t.template topLeftCorner<3, 3>() = svd.matrixV().transpose();
  t.template bottomRightCorner<2, 2>() = svd.matrixU().transpose();
  const Matrix<mp, 5, 5> b = t * a * t.transpose();

  PoleCheck out;
  // Direction i couples a_i (row i) with b_i (row 3 + i); a_2 stands alone.
  auto group = [](int k) { return k < 3 ? k : k - 3; };
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c)
      if (group(r) != group(c))
        out.max_coupling = std::max(out.max_coupling, static_cast<double>(abs(b(r, c))));

  const mp ra = sqrt(mp(alpha));
  for (int i = 0; i < 2; ++i) {
    const mp tr = b(i, i) + b(3 + i, 3 + i);
    const mp det = b(i, i) * b(3 + i, 3 + i) - b(i, 3 + i) * b(3 + i, i);
    const mp disc = tr * tr / 4 - det;
    const mp expected = -ra * svd.singularValues()[i];
    if (disc < 0) {
      out.max_imag = std::max(out.max_imag, static_cast<double>(sqrt(-disc)));
      out.max_pole_error = std::max(
          out.max_pole_error, static_cast<double>(abs(tr / 2 - expected) / (1 - expected)));
    } else {
      const mp root = sqrt(disc);
      for (const mp& pole : {tr / 2 - root, tr / 2 + root})
        out.max_pole_error = std::max(
            out.max_pole_error, static_cast<double>(abs(pole - expected) / (1 - expected)));
    }
  }
  out.max_pole_error = std::max(out.max_pole_error, static_cast<double>(abs(b(2, 2) + mp(d2))));
  return out;
}

}  // namespace oracle
