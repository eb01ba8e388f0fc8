#include <random>

#include "doctest.h"
#include "linesfm/errors.hpp"
#include "linesfm/geometry.hpp"
#include "oracles.hpp"

using namespace linesfm;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidInput;
}

}  // namespace

TEST_CASE("moment_from_point examples") {
  CHECK(moment_from_point({0, 0, 1}, {1, 0, 0}).isApprox(Vec3(0, 1, 0)));
  CHECK(moment_from_point({5, 0, 1}, {1, 0, 0}).isApprox(Vec3(0, 1, 0)));
  CHECK(moment_from_point({0, 0, 0}, {0, 1, 0}).norm() == 0.0);
}

TEST_CASE("moment does not depend on the point chosen on the line") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> t(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = oracle::random_vec(rng, 3.0);
    const Vec3 d = oracle::random_vec(rng);
    const double s = t(rng);
    CHECK((moment_from_point(p, d) - moment_from_point(p + s * d, d)).norm() < 1e-12 * (1 + std::abs(s)) * 10);
  }
}

TEST_CASE("closest point has |p x d| = |p|") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    const Vec3 p = line.closest_point();
    CHECK(std::abs(p.cross(line.d).norm() - p.norm()) < 1e-12);
    CHECK(std::abs(p.norm() - line.depth) < 1e-12);
  }
}

TEST_CASE("binormalize") {
  const PluckerLine line = binormalize({{2, 0, 0}, {0, 0, 4}});
  CHECK(line.d.isApprox(Vec3(1, 0, 0)));
  CHECK(line.depth == doctest::Approx(2.0));
  CHECK(line.h.isApprox(Vec3(0, 0, 1)));
  CHECK(line.satisfies_invariants());

  CHECK(kind_of([] { binormalize({{0, 1, 0}, {0, 0, 0}}); }) == ErrorKind::DegenerateLine);
  CHECK(kind_of([] { binormalize({{0, 0, 0}, {0, 0, 1}}); }) == ErrorKind::InvalidLine);
  CHECK(kind_of([] { binormalize({{1, 0, 0}, {1, 0, 1}}); }) == ErrorKind::InvalidLine);
}

TEST_CASE("binormalize is invariant to positive scaling") {
  const Vec3 u = Vec3(1, 1, 0) / std::sqrt(2.0) * 3.0;
  const Vec3 m = moment_from_point({0, 0, 2}, u);
  const PluckerLine ref = binormalize({u, m});
  CHECK(ref.depth == doctest::Approx(2.0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> log_scale(-6.0, 6.0);
  for (int i = 0; i < 1000; ++i) {
    const double k = std::pow(10.0, log_scale(rng));
    const PluckerLine line = binormalize({k * u, k * m});
    CHECK((line.d - ref.d).norm() < 1e-12);
    CHECK((line.h - ref.h).norm() < 1e-12);
    CHECK(std::abs(line.depth - ref.depth) < 1e-12);
  }
}

TEST_CASE("h of a line from a point and direction") {
  const PluckerLine line = line_from_point_direction({0, 0, 1}, {1, 0, 0});
  CHECK(project(line).isApprox(Vec3(0, 1, 0)));
}

TEST_CASE("h is invariant to the depth with d fixed") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 500; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    const double k = scale(rng);
    const PluckerLine scaled = binormalize({line.d, k * line.depth * line.h});
    CHECK((scaled.h - line.h).norm() < 1e-12);
  }
}

TEST_CASE("reduce examples") {
  const ReducedState a = reduce(PluckerLine{{1, 0, 0}, 2.0, {0, 0, 1}});
  CHECK(a.axis == Axis::Z);
  CHECK(a.chi_free.isApprox(Vec2(0.5, 0.0)));

  const ReducedState b = reduce(PluckerLine{{0, 0, 1}, 1.0, {0, 1, 0}});
  CHECK(b.axis == Axis::Y);
  CHECK((b.chi_free - Vec2(0.0, 1.0)).norm() < 1e-15);
}

TEST_CASE("recover examples and errors") {
  const PluckerLine a = recover({{0, 0, 1}, {0.5, 0.0}, Axis::Z});
  CHECK(a.d.isApprox(Vec3(1, 0, 0)));
  CHECK(a.depth == doctest::Approx(2.0));

  const PluckerLine b = recover({{0, 1, 0}, {0.0, 1.0}, Axis::Y});
  CHECK(b.d.isApprox(Vec3(0, 0, 1)));
  CHECK(b.depth == doctest::Approx(1.0));

  CHECK(kind_of([] { recover({{0, 0, 1}, {0.0, 0.0}, Axis::Z}); }) == ErrorKind::DepthOverflow);
  CHECK(kind_of([] { recover({{1, 0, 0}, {0.3, 0.2}, Axis::Z}); }) ==
        ErrorKind::EliminationSingularity);
}

TEST_CASE("reduce and recover round trip on random lines") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    const ReducedState r = reduce(line);
    const PluckerLine back = recover(r);
    worst = std::max(worst, (back.coordinates() - line.coordinates()).cwiseAbs().maxCoeff());
    // recover enforces d.(l h) = 0 by construction.
    CHECK(std::abs(back.d.dot(back.moment())) < 1e-12);
    const ReducedState again = reduce(back, r.axis);
    worst = std::max(worst, (again.chi_free - r.chi_free).cwiseAbs().maxCoeff());
    worst = std::max(worst, (again.h - r.h).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("elimination reconstructs the removed component for every axis") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const PluckerLine line = oracle::random_line(rng);
    const Vec3 chi = line.chi();
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
      const int a = index(axis);
      if (std::abs(line.h[a]) < 0.05) continue;
      const Vec3 back = expand_chi(line.h, free_part(chi, axis), axis);
      double sum = 0.0;
      for (int j = 0; j < 3; ++j)
        if (j != a) sum += chi[j] * line.h[j];
      CHECK(std::abs(back[a] + sum / line.h[a]) < 1e-12);
      CHECK((back - chi).norm() < 1e-10 * (1 + chi.norm()));
    }
  }
}

TEST_CASE("dominant axis and free indices") {
  CHECK(dominant_axis({0.1, -0.9, 0.3}) == Axis::Y);
  CHECK(dominant_axis({-0.8, 0.1, 0.5}) == Axis::X);
  CHECK(free_indices(Axis::Y) == std::array<int, 2>{0, 2});
  CHECK(kind_of([] { elimination_basis({1, 0, 0}, Axis::Y); }) ==
        ErrorKind::EliminationSingularity);
}
