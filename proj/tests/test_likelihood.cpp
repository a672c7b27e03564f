#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

#include "lmfrail/errors.hpp"
#include "lmfrail/likelihood.hpp"
#include "lmfrail/region.hpp"
#include "lmfrail/rng.hpp"
#include "oracles.hpp"

using namespace lmfrail;

namespace {

SurvivalRecord record(double time, int status,
                      std::vector<double> covs = {}) {
  SurvivalRecord r;
  r.time = time;
  r.status = status;
  r.covariates = Eigen::Map<Eigen::VectorXd>(covs.data(),
                                             static_cast<long>(covs.size()));
  return r;
}

}  // namespace

TEST_SUITE("likelihood") {

TEST_CASE("linear predictor") {
  RegressionParams unit{Eigen::VectorXd(), BaselineHazard::constant_rate(1.0)};
  CHECK(linear_predictor(record(1.0, 1), unit) == doctest::Approx(1.0));

  RegressionParams half{Eigen::VectorXd::Constant(1, std::log(2.0)),
                        BaselineHazard::constant_rate(0.5)};
  CHECK(linear_predictor(record(2.0, 0, {1.0}), half) ==
        doctest::Approx(2.0));

  RegressionParams step{Eigen::VectorXd::Zero(1),
                        BaselineHazard::nonparametric(
                            {{1.0, 0.2}, {2.0, 0.3}})};
  // Step-function oracle: increments at times <= 3 sum to 0.5.
  CHECK(linear_predictor(record(3.0, 0, {0.0}), step) ==
        doctest::Approx(0.5));
  CHECK(linear_predictor(record(1.5, 0, {0.0}), step) ==
        doctest::Approx(0.2));
  CHECK(linear_predictor(record(0.5, 0, {0.0}), step) == 0.0);
}

TEST_CASE("mixture terms match the jet oracle at the pinned points") {
  auto t = mixture_terms(0, 1.0);
  CHECK(t.a2 == doctest::Approx(1.0));
  CHECK(t.a3 == doctest::Approx(-1.0));
  CHECK(t.a4 == doctest::Approx(1.0));

  t = mixture_terms(1, 1.0);
  CHECK(t.a2 == doctest::Approx(-1.0));
  CHECK(t.a3 == doctest::Approx(2.0));
  CHECK(t.a4 == doctest::Approx(-3.0));

  t = mixture_terms(1, 0.0);
  CHECK(t.a2 == 0.0);
  CHECK(t.a3 == 0.0);
  CHECK(t.a4 == 0.0);

  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const double y = 8.0 * rng.uniform01();
    const int status = rng.uniform01() < 0.5 ? 1 : 0;
    const auto got = mixture_terms(status, y);
    const auto want = oracles::mixture_terms_jet(status, y);
    CHECK(got.a2 == doctest::Approx(want[0]).epsilon(1e-12));
    CHECK(got.a3 == doctest::Approx(want[1]).epsilon(1e-12));
    CHECK(got.a4 == doctest::Approx(want[2]).epsilon(1e-12));
  }
}

TEST_CASE("mixture factor equals the quartics on a dense grid") {
  Rng rng(5150);
  for (int trial = 0; trial < 20; ++trial) {
    const LmmParams lmm{2.0 * rng.uniform01() - 1.0,
                        2.0 * rng.uniform01() - 1.0,
                        2.0 * rng.uniform01() - 1.0};
    const auto pc = region::p_coeffs(lmm);
    const auto qc = region::q_coeffs(lmm);
    for (double y = 0.0; y <= 50.0; y += 0.05) {
      const auto a0 = mixture_terms(0, y);
      const auto a1 = mixture_terms(1, y);
      const double f0 =
          1.0 + lmm.lambda2 * a0.a2 + lmm.lambda3 * a0.a3 +
          lmm.lambda4 * a0.a4;
      const double f1 =
          1.0 + lmm.lambda2 * a1.a2 + lmm.lambda3 * a1.a3 +
          lmm.lambda4 * a1.a4;
      const double pv =
          (((pc.a * y + pc.b) * y + pc.c) * y + pc.d) * y + pc.e;
      const double qv =
          (((qc.a * y + qc.b) * y + qc.c) * y + qc.d) * y + qc.e;
      CHECK(f0 ==
            doctest::Approx(pv).epsilon(1e-12).scale(std::max(1.0, pv)));
      CHECK(f1 ==
            doctest::Approx(qv).epsilon(1e-12).scale(std::max(1.0, qv)));
    }
  }
}

TEST_CASE("log likelihood pinned values") {
  const SurvivalDataset one({record(1.0, 1)});
  const RegressionParams params{Eigen::VectorXd(),
                                BaselineHazard::constant_rate(1.0)};
  CHECK(log_likelihood(one, params, {0.0, 0.0, 0.0}) ==
        doctest::Approx(-1.0).epsilon(1e-15));

  const SurvivalDataset two({record(1.0, 0), record(1.0, 1)});
  // Censored record at y = 1 with lambda = (0.1, 0, 0.01): factor
  // p(1) = 1 + 0.1 + 0.01. Second record keeps the dataset valid; use
  // the single-record contribution by differencing.
  const double with_censored =
      log_likelihood(two, params, {0.1, 0.0, 0.01});
  const double only_event =
      log_likelihood(SurvivalDataset({record(1.0, 1)}), params,
                     {0.1, 0.0, 0.01});
  CHECK(with_censored - only_event ==
        doctest::Approx(-1.0 + std::log(1.11)).epsilon(1e-12));
}

TEST_CASE("lambda = 0 reduces to the no-frailty log likelihood") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = oracles::random_dataset(rng, 40, 2);
    Eigen::VectorXd beta(2);
    beta << rng.normal() * 0.3, rng.normal() * 0.3;

    const RegressionParams constant{beta, BaselineHazard::constant_rate(0.7)};
    const double ll = log_likelihood(data, constant, {0.0, 0.0, 0.0});
    const double want = oracles::no_frailty_loglik(data, constant);
    CHECK(ll == doctest::Approx(want).epsilon(1e-12));

    std::vector<HazardJump> jumps;
    double t = 0.0;
    for (const auto& rec : data) {
      if (rec.status == 1) t = std::max(t, rec.time);
    }
    jumps.push_back({t, 0.4});
    // Give every event time a jump so the nonparametric variant is
    // well defined.
    std::vector<double> times;
    for (const auto& rec : data) {
      if (rec.status == 1) times.push_back(rec.time);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    jumps.clear();
    for (std::size_t i = 0; i < times.size(); ++i) {
      jumps.push_back({times[i], 0.05 + 0.01 * static_cast<double>(i)});
    }
    const RegressionParams nonpar{beta,
                                  BaselineHazard::nonparametric(jumps)};
    CHECK(log_likelihood(data, nonpar, {0.0, 0.0, 0.0}) ==
          doctest::Approx(oracles::no_frailty_loglik(data, nonpar))
              .epsilon(1e-12));
  }
}

TEST_CASE("nonpositive mixture factor reports the record") {
  // Boundary point with double root y* = 4: an event at y = 4 zeroes
  // its factor.
  const SurvivalDataset data({record(0.5, 1), record(4.0, 1)});
  const RegressionParams params{Eigen::VectorXd(),
                                BaselineHazard::constant_rate(1.0)};
  const LmmParams boundary{1.0, 0.5625, 0.1171875};
  try {
    log_likelihood(data, params, boundary);
    FAIL("expected BoundaryViolation");
  } catch (const BoundaryViolation& e) {
    CHECK(e.record_index() == 1);
  }
}

TEST_CASE("gradient and Hessian match finite differences") {
  Rng rng(31337);
  const auto data = oracles::bounded_dataset(rng, 30, 1);
  const RegressionParams params{Eigen::VectorXd::Constant(1, 0.2),
                                BaselineHazard::constant_rate(0.8)};
  const LikelihoodParts parts = prepare_likelihood(data, params);
  // Drop the lambda-independent base term so finite differences are not
  // dominated by rounding of a large constant.
  LikelihoodParts centered = parts;
  centered.base_loglik = 0.0;
  const auto f = [&](const LmmParams& l) {
    return mixture_loglik(centered, l);
  };

  for (int trial = 0; trial < 100; ++trial) {
    const LmmParams lmm = oracles::random_interior_for_fd(rng, parts.terms);
    const double step = oracles::safe_fd_step(parts.terms, lmm);
    const auto [g, h] = mixture_derivatives(parts, lmm);
    const Eigen::Vector3d gfd = oracles::fd_gradient(f, lmm, step);
    for (int j = 0; j < 3; ++j) {
      CHECK(g[j] == doctest::Approx(gfd[j])
                        .epsilon(1e-6)
                        .scale(std::max(1.0, std::abs(g[j]))));
    }
    const Eigen::Matrix3d hfd = oracles::fd_hessian(f, lmm, step);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(h(i, j) == doctest::Approx(hfd(i, j))
                             .epsilon(1e-6)
                             .scale(std::max(1.0, std::abs(h(i, j)))));
      }
    }
  }
}

TEST_CASE("Hessian is negative semidefinite at interior points") {
  Rng rng(555);
  const auto data = oracles::random_dataset(rng, 25, 1);
  const RegressionParams params{Eigen::VectorXd::Constant(1, -0.1),
                                BaselineHazard::constant_rate(1.2)};
  const LikelihoodParts parts = prepare_likelihood(data, params);
  for (int trial = 0; trial < 100; ++trial) {
    const LmmParams lmm = oracles::random_member(rng, 0.01);
    const auto [g, h] = mixture_derivatives(parts, lmm);
    (void)g;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h);
    CHECK(es.eigenvalues().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("derivatives at the origin equal the raw term sums") {
  Rng rng(8);
  const auto data = oracles::random_dataset(rng, 15, 1);
  const RegressionParams params{Eigen::VectorXd::Constant(1, 0.0),
                                BaselineHazard::constant_rate(1.0)};
  const LikelihoodParts parts = prepare_likelihood(data, params);
  const auto [g, h] = mixture_derivatives(parts, {0.0, 0.0, 0.0});
  Eigen::Vector3d gsum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hsum = Eigen::Matrix3d::Zero();
  for (const auto& t : parts.terms) {
    const Eigen::Vector3d a(t.a2, t.a3, t.a4);
    gsum += a;
    hsum -= a * a.transpose();
  }
  CHECK((g - gsum).norm() == 0.0);
  CHECK((h - hsum).norm() == 0.0);
}

}  // TEST_SUITE
