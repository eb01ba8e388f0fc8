#include <random>
#include <vector>

#include <Eigen/SVD>

#include "doctest.h"
#include "linesfm/control.hpp"
#include "linesfm/dynamics.hpp"
#include "linesfm/errors.hpp"
#include "oracles.hpp"

using namespace linesfm;

namespace {

// Eigenvalues of Omega Omega^T computed from Omega and the closed-form 2x2
// eigenvalue formula.
Vec2 sigma_sq_of(const Vec3& h, const Vec3& nu, Axis axis) {
  const OmegaMatrix o = omega_matrix(h, nu, axis);
  const Eigen::Matrix2d m = o * o.transpose();
  return oracle::sym2_eigenvalues(m(0, 0), m(0, 1), m(1, 1));
}

}  // namespace

TEST_CASE("eigen analysis example") {
  const EigenAnalysis e = eigen_analysis({0, 0, 1}, {0, 0, 1}, Axis::Z);
  CHECK(e.sigma_sq.isApprox(Vec2(1, 1)));
  CHECK((e.j_nu.row(0) - Eigen::RowVector3d(0, 0, 2)).norm() < 1e-12);
  CHECK((e.j_nu.row(1) - Eigen::RowVector3d(0, 0, 2)).norm() < 1e-12);
  CHECK((e.eigvecs.transpose() * e.eigvecs - Mat2::Identity()).norm() < 1e-12);
}

TEST_CASE("zero excitation") {
  const EigenAnalysis e = eigen_analysis({0, 0, 1}, {1, 0, 0}, Axis::Z);
  CHECK(e.sigma_sq.norm() == 0.0);
  CHECK(e.j_nu.norm() == 0.0);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    Vec3 nu = oracle::random_vec(rng);
    nu -= line.h * line.h.dot(nu);
    const EigenAnalysis z = eigen_analysis(line.h, nu, dominant_axis(line.h));
    CHECK(z.sigma_sq.norm() < 1e-28);
    CHECK(z.j_nu.norm() < 1e-14);
  }
}

TEST_CASE("Jacobian matches central differences") {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    const Axis axis = dominant_axis(line.h);
    Vec3 nu = oracle::random_vec(rng);
    if (std::abs(nu.dot(line.h)) < 0.05) nu += 0.2 * line.h;
    const EigenAnalysis e = eigen_analysis(line.h, nu, axis);
    for (int k = 0; k < 2; ++k) {
      const Vec3 fd = oracle::gradient(
          [&](const Vec3& x) { return sigma_sq_of(line.h, x, axis)[k]; }, nu, 1e-6);
      worst = std::max(worst, (e.j_nu.row(k).transpose() - fd).norm() / fd.norm());
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("eigenvalues scale quadratically with nu") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> scale(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    const Axis axis = dominant_axis(line.h);
    const Vec3 nu = oracle::random_vec(rng);
    const double c = scale(rng);
    const Vec2 a = eigen_analysis(line.h, c * nu, axis).sigma_sq;
    const Vec2 b = eigen_analysis(line.h, nu, axis).sigma_sq;
    CHECK((a - c * c * b).norm() < 1e-12 * (1 + a.norm()));
  }
}

TEST_CASE("single-line Jacobian rows are parallel to h") {
  // Omega Omega^T = (nu.h)^2 B B^T: nu only enters through nu.h.
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    const Axis axis = dominant_axis(line.h);
    const EigenAnalysis e = eigen_analysis(line.h, oracle::random_vec(rng), axis);
    for (int k = 0; k < 2; ++k)
      CHECK(e.j_nu.row(k).transpose().cross(line.h).norm() < 1e-12 * (1 + e.j_nu.norm()));
    CHECK(jacobian_rank(e.j_nu) <= 1);
    // The ratio of the eigenvalues is fixed by h alone.
    const double hz = line.h[index(axis)];
    CHECK(e.sigma_sq[0] == doctest::Approx(hz * hz * e.sigma_sq[1]).epsilon(1e-9));
  }
}

TEST_CASE("eigenvector signs follow the previous basis") {
  const Vec3 h = Vec3(0.3, 0.2, 0.9).normalized();
  const Vec3 nu(0.1, 0.0, 0.3);
  const EigenAnalysis first = eigen_analysis(h, nu, Axis::Z);
  const Mat2 flipped = -first.eigvecs;
  const EigenAnalysis next = eigen_analysis(h, nu * 1.001, Axis::Z, flipped);
  for (int k = 0; k < 2; ++k) CHECK(next.eigvecs.col(k).dot(flipped.col(k)) > 0.99);

  // Repeated eigenvalues keep the previous basis.
  Mat2 rot;
  rot << std::cos(0.4), -std::sin(0.4), std::sin(0.4), std::cos(0.4);
  const EigenAnalysis rep = eigen_analysis({0, 0, 1}, {0, 0, 1}, Axis::Z, rot);
  CHECK((rep.eigvecs - rot).norm() < 1e-12);
}

TEST_CASE("damped pseudo-inverse") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Mat23 j = Mat23::Random();
    const Eigen::Matrix<double, 3, 2> exact = j.transpose() * (j * j.transpose()).inverse();
    const Eigen::Matrix<double, 3, 2> damped = damped_pseudo_inverse(j, 1e-6);
    CHECK((damped - exact).norm() < 1e-8 * (1 + exact.norm()));
    // (I - J+ J) J^T = 0
    const Mat3 p = Mat3::Identity() - damped * j;
    CHECK((p * j.transpose()).norm() < 1e-8);
  }
  CHECK(damped_pseudo_inverse(Mat23::Zero(), 1e-6).norm() == 0.0);
}

TEST_CASE("null-space motion leaves the eigenvalues unchanged to first order") {
  std::mt19937_64 rng(6);
  const ControlGains gains;
  for (int i = 0; i < 500; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    const Axis axis = dominant_axis(line.h);
    Vec3 nu = oracle::random_vec(rng);
    if (std::abs(nu.dot(line.h)) < 0.05) nu += 0.2 * line.h;
    EigenAnalysis e = eigen_analysis(line.h, nu, axis);

    const auto pinv = damped_pseudo_inverse(e.j_nu, gains.damping);
    const Vec3 null_part = (Mat3::Identity() - pinv * e.j_nu) * nu;
    CHECK((e.j_nu * null_part).norm() < 1e-9 * (1 + e.j_nu.norm() * nu.norm()));

    // At the set point only the null-space term acts.
    EigenAnalysis at_goal = e;
    at_goal.sigma_sq = gains.sigma_des_sq;
    const Vec3 rate = velocity_rate(at_goal, nu, gains);
    CHECK((rate + gains.k2 * null_part).norm() < 1e-12);
    CHECK((e.j_nu * rate).norm() < 1e-9 * (1 + e.j_nu.norm() * nu.norm()));
    CHECK((velocity_command(at_goal, nu, gains, 1e-3) - (nu + 1e-3 * rate)).norm() < 1e-15);
  }
}

TEST_CASE("aggregation") {
  std::mt19937_64 rng(7);
  std::vector<EigenAnalysis> three;
  for (int i = 0; i < 3; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    three.push_back(eigen_analysis(line.h, oracle::random_vec(rng), dominant_axis(line.h)));
  }

  const EigenAnalysis one = aggregate_multiline(std::span(three.data(), 1));
  CHECK(one.sigma_sq == three[0].sigma_sq);
  CHECK(one.j_nu == three[0].j_nu);

  const std::vector<EigenAnalysis> same(3, three[1]);
  const EigenAnalysis s = aggregate_multiline(same);
  CHECK((s.sigma_sq - three[1].sigma_sq).norm() < 1e-15);
  CHECK((s.j_nu - three[1].j_nu).norm() < 1e-15);
  CHECK_FALSE(s.has_eigvecs);

  const EigenAnalysis mean = aggregate_multiline(three);
  CHECK((mean.sigma_sq - (three[0].sigma_sq + three[1].sigma_sq + three[2].sigma_sq) / 3).norm() <
        1e-15);

  std::vector<EigenAnalysis> scaled = three;
  for (auto& e : scaled) {
    e.sigma_sq *= 2.5;
    e.j_nu *= 2.5;
  }
  const EigenAnalysis ms = aggregate_multiline(scaled);
  CHECK((ms.sigma_sq - 2.5 * mean.sigma_sq).norm() < 1e-14);
  CHECK((ms.j_nu - 2.5 * mean.j_nu).norm() < 1e-14);

  try {
    aggregate_multiline({});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
}

TEST_CASE("compensation") {
  CHECK(compensating_angular_velocity({0, 0, 1}, {1, 0, 0}, {0.5, 0.2, 0}).norm() == 0.0);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    const Vec3 nu = oracle::random_vec(rng);
    const Vec3 err = oracle::random_vec(rng, 0.3);
    const Vec3 chi_hat = line.chi() + err - line.h * line.h.dot(err);
    const Vec3 om = compensating_angular_velocity(line.h, nu, chi_hat);
    const Vec3 h_dot = full_dynamics(line, {nu, om}).h_dot;
    CHECK(h_dot.norm() <= std::abs(nu.dot(line.h)) * (chi_hat - line.chi()).norm() + 1e-14);

    const Vec3 exact = compensating_angular_velocity(line.h, nu, line.chi());
    CHECK(full_dynamics(line, {nu, exact}).h_dot.norm() < 1e-14);
  }
}
