#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lmfrail/errors.hpp"
#include "lmfrail/region.hpp"
#include "lmfrail/rng.hpp"
#include "oracles.hpp"

using namespace lmfrail;
using namespace lmfrail::region;

namespace {

std::vector<double> ascending(const QuarticCoeffs& q) {
  return {q.e, q.d, q.c, q.b, q.a};
}

}  // namespace

TEST_SUITE("region") {

TEST_CASE("q coefficients") {
  auto q = q_coeffs({0.0, 0.0, 0.0});
  CHECK(q.a == 0.0);
  CHECK(q.b == 0.0);
  CHECK(q.c == 0.0);
  CHECK(q.d == 0.0);
  CHECK(q.e == 1.0);

  q = q_coeffs({1.0, 0.5625, 0.1171875});
  CHECK(q.a == doctest::Approx(0.1171875));
  CHECK(q.b == doctest::Approx(-1.03125));
  CHECK(q.c == doctest::Approx(2.6875));
  CHECK(q.d == doctest::Approx(-2.0));
  CHECK(q.e == 1.0);

  q = q_coeffs({1.0, 0.0, 0.0});
  CHECK(q.a == 0.0);
  CHECK(q.b == 0.0);
  CHECK(q.c == 1.0);
  CHECK(q.d == -2.0);
  CHECK(q.e == 1.0);
}

TEST_CASE("p coefficients") {
  auto p = p_coeffs({0.0, 0.0, 0.0});
  CHECK(p.a == 0.0);
  CHECK(p.c == 0.0);
  CHECK(p.e == 1.0);

  p = p_coeffs({2.0, -1.0, 3.0});
  CHECK(p.a == 3.0);
  CHECK(p.b == 1.0);
  CHECK(p.c == 2.0);
  CHECK(p.d == 0.0);
  CHECK(p.e == 1.0);

  p = p_coeffs({0.1, 0.0, 0.01});
  CHECK(p.a == 0.01);
  CHECK(p.b == 0.0);
  CHECK(p.c == 0.1);
  CHECK(p.d == 0.0);
  CHECK(p.e == 1.0);
}

TEST_CASE("quartic sign test on known cases") {
  // x^4 + 1: bucket -2 <= beta <= 6 with Delta = 6912 and L1 = -32.
  const QuarticCoeffs c1{1.0, 0.0, 0.0, 0.0, 1.0};
  const auto inv = scaled_invariants(c1);
  CHECK(inv.alpha == 0.0);
  CHECK(inv.beta_scaled == 0.0);
  CHECK(inv.gamma == 0.0);
  CHECK(inv.Delta == doctest::Approx(6912.0));
  CHECK(inv.L1 == doctest::Approx(-32.0));
  CHECK(nonneg_on_positive_axis(c1));
  CHECK(oracles::grid_nonneg_on_positive_axis(ascending(c1)).nonneg);

  // x^4 - 3x^3 + 1 dips to -1 at x = 1.
  const QuarticCoeffs c2{1.0, -3.0, 0.0, 0.0, 1.0};
  CHECK_FALSE(nonneg_on_positive_axis(c2));
  CHECK_FALSE(oracles::grid_nonneg_on_positive_axis(ascending(c2)).nonneg);

  // (x^2 - 1)^2 touches zero at x = 1.
  const QuarticCoeffs c3{1.0, 0.0, -2.0, 0.0, 1.0};
  CHECK(nonneg_on_positive_axis(c3));
}

TEST_CASE("sign test preconditions") {
  CHECK_THROWS_AS(nonneg_on_positive_axis({0.0, 0.0, 0.0, 0.0, 1.0}),
                  std::domain_error);
  CHECK_THROWS_AS(nonneg_on_positive_axis({1.0, 0.0, 0.0, 0.0, -1.0}),
                  std::domain_error);
}

TEST_CASE("membership basics") {
  CHECK(is_member({0.0, 0.0, 0.0}));
  CHECK(is_member({1.0, 0.5625, 0.1171875}));  // boundary point
  CHECK_FALSE(is_member({0.0, 0.0, -0.001}));
  CHECK(is_member({1.0, 0.0, 0.0}));        // quadratic edge case
  CHECK_FALSE(is_member({1.001, 0.0, 0.0}));
  CHECK_FALSE(is_member({0.0, 0.5, 0.0}));  // cubic leading sign
}

TEST_CASE("membership agrees with the grid + tail oracle") {
  Rng rng(777);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const LmmParams lmm{4.0 * rng.uniform01() - 2.0,
                        4.0 * rng.uniform01() - 2.0,
                        4.0 * rng.uniform01() - 2.0};
    const auto oracle =
        oracles::grid_nonneg_on_positive_axis(ascending(q_coeffs(lmm)));
    if (std::isfinite(oracle.min_value) &&
        std::abs(oracle.min_value) < 1e-7) {
      continue;  // grid cannot resolve boundary-adjacent cases
    }
    CHECK(is_member(lmm) == oracle.nonneg);
    ++checked;
  }
  CHECK(checked > 9000);
}

TEST_CASE("implication: membership with lambda4 > 0 keeps p nonnegative") {
  Rng rng(4242);
  int found = 0;
  while (found < 10000) {
    const LmmParams lmm{4.0 * rng.uniform01() - 2.0,
                        4.0 * rng.uniform01() - 2.0,
                        4.0 * rng.uniform01() - 2.0};
    if (!(lmm.lambda4 > 0.0) || !is_member(lmm)) continue;
    ++found;
    const auto oracle = oracles::grid_nonneg_on_positive_axis(
        ascending(p_coeffs(lmm)), 50.0, 1e-2);
    CHECK(oracle.min_value > -1e-9);
  }
}

TEST_CASE("convexity probe: midpoints of members are members") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const LmmParams a = oracles::random_member(rng);
    const LmmParams b = oracles::random_member(rng);
    const LmmParams mid = LmmParams::from_vec(0.5 * (a.vec() + b.vec()));
    CHECK(is_member(mid));
  }
}

TEST_CASE("boundary parametrization examples") {
  const auto r = boundary_param(4.0, 1.0);
  CHECK(r.valid);
  CHECK(r.lambda.lambda2 == 1.0);
  CHECK(r.lambda.lambda3 == doctest::Approx(0.5625).epsilon(1e-14));
  CHECK(r.lambda.lambda4 == doctest::Approx(0.1171875).epsilon(1e-14));

  const auto bad = boundary_param(1.0, 0.0);
  CHECK_FALSE(bad.valid);
  CHECK(bad.lambda.lambda3 == doctest::Approx(-8.0 / 7.0));
  CHECK(bad.lambda.lambda4 == doctest::Approx(-3.0 / 7.0));
}

TEST_CASE("boundary parametrization satisfies its defining equations") {
  for (double y : {2.5, 3.0, 4.0, 5.0, 8.0}) {
    for (double l2 = -1.0; l2 <= 2.0; l2 += 0.25) {
      const auto r = boundary_param(y, l2);
      if (!r.valid) continue;
      const auto qc = q_coeffs(r.lambda);
      const auto qv = [&](double x) {
        return (((qc.a * x + qc.b) * x + qc.c) * x + qc.d) * x + qc.e;
      };
      const auto qd = [&](double x) {
        return ((4.0 * qc.a * x + 3.0 * qc.b) * x + 2.0 * qc.c) * x + qc.d;
      };
      CHECK(std::abs(qv(y)) <= 1e-9);
      CHECK(std::abs(qd(y)) <= 1e-9);
      CHECK(is_member(r.lambda));
    }
  }
}

TEST_CASE("supporting plane normal") {
  const Eigen::Vector3d n4 = supporting_plane_normal(4.0);
  const Eigen::Vector3d expected4 =
      Eigen::Vector3d(1.0, -2.0, 0.0) / std::sqrt(5.0);
  CHECK((n4 - expected4).norm() < 1e-14);

  const Eigen::Vector3d n2 = supporting_plane_normal(2.0);
  const Eigen::Vector3d dir2 = Eigen::Vector3d(0.0, 4.0, -16.0).normalized();
  CHECK((n2 - dir2).norm() < 1e-14);
}

TEST_CASE("normal is orthogonal to finite-difference tangents") {
  const double h = 1e-5;
  for (double y : {3.0, 4.0, 5.0}) {
    const double l2 = 1.0;
    REQUIRE(boundary_param(y, l2).valid);
    const Eigen::Vector3d n = supporting_plane_normal(y);
    const Eigen::Vector3d ty =
        (boundary_param(y + h, l2).lambda.vec() -
         boundary_param(y - h, l2).lambda.vec()) /
        (2.0 * h);
    const Eigen::Vector3d tl =
        (boundary_param(y, l2 + h).lambda.vec() -
         boundary_param(y, l2 - h).lambda.vec()) /
        (2.0 * h);
    CHECK(std::abs(n.dot(ty.normalized())) < 1e-9);
    CHECK(std::abs(n.dot(tl.normalized())) < 1e-9);
  }
}

TEST_CASE("projection idempotence") {
  for (double y = 0.5; y <= 10.0; y += 0.5) {
    const Eigen::Vector3d n = supporting_plane_normal(y);
    const Eigen::Matrix3d pi =
        Eigen::Matrix3d::Identity() - n * n.transpose();
    CHECK(((pi * pi) - pi).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((pi * n).norm() < 1e-12);
  }
}

TEST_CASE("double root extraction and round trip") {
  CHECK(double_root({1.0, 0.5625, 0.1171875}) ==
        doctest::Approx(4.0).epsilon(1e-6));
  CHECK_THROWS_AS(double_root({0.0, 0.0, 0.0}), NotOnBoundary);

  for (double y : {3.0, 4.0, 5.0, 8.0}) {
    const auto r = boundary_param(y, 1.0);
    REQUIRE(r.valid);
    CHECK(double_root(r.lambda) == doctest::Approx(y).epsilon(1e-6));
  }
}

TEST_CASE("segment boundary intersection") {
  const LmmParams origin{0.0, 0.0, 0.0};
  const LmmParams down{0.0, 0.0, -1.0};
  const LmmParams hit = segment_boundary_intersection(origin, down);
  CHECK(hit.lambda4 >= 0.0);
  CHECK(hit.vec().norm() < 1e-9);

  const auto bp = boundary_param(4.0, 1.0);
  const LmmParams outside = LmmParams::from_vec(2.0 * bp.lambda.vec());
  REQUIRE_FALSE(is_member(outside));
  const LmmParams star = segment_boundary_intersection(origin, outside);
  CHECK((star.vec() - bp.lambda.vec()).norm() < 1e-6 * outside.vec().norm());
  CHECK_NOTHROW(double_root(star));

  CHECK_THROWS_AS(segment_boundary_intersection(down, origin),
                  std::domain_error);
}

TEST_CASE("boundary defect signs") {
  CHECK(boundary_defect({0.0, 0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(boundary_defect({1.0, 0.5625, 0.1171875}) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(boundary_defect({0.0, 0.0, -1.0}) < 0.0);
  CHECK(boundary_defect({2.0, 0.5625, 0.1171875}) < 0.0);
}

}  // TEST_SUITE
