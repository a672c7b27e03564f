#include "doctest.h"

#include <cmath>

#include "lmfrail/em_gamma.hpp"
#include "lmfrail/rng.hpp"
#include "lmfrail/sim_bench.hpp"
#include "oracles.hpp"

using namespace lmfrail;

TEST_SUITE("em_gamma") {

TEST_CASE("eta -> 0 limit matches the no-frailty Cox/Breslow oracle") {
  sim::SimConfig sc;
  sc.n = 150;
  sc.frailty = sim::FrailtySpec::none();
  sc.master_seed = 17;
  const SurvivalDataset data = sim::generate_dataset(sc, 0);

  EmConfig cfg;
  const EmFit res = em_fit_fixed_eta(data, 1e-8, cfg);
  REQUIRE(res.converged);

  const auto oracle = oracles::cox_breslow_oracle(data);
  CHECK(res.beta_hat[0] == doctest::Approx(oracle.beta[0]).epsilon(1e-4));

  // Breslow increments agree too.
  REQUIRE(res.baseline_hat.jumps().size() == oracle.breslow.size());
  for (std::size_t k = 0; k < oracle.breslow.size(); ++k) {
    CHECK(res.baseline_hat.jumps()[k].increment ==
          doctest::Approx(oracle.breslow[k].increment).epsilon(1e-4));
  }

  const Eigen::VectorXd w =
      em_weights(data, res.beta_hat, res.baseline_hat, 1e-8);
  CHECK((w.array() - 1.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("censored weights fall below one") {
  sim::SimConfig sc;
  sc.n = 120;
  sc.frailty = sim::FrailtySpec::gamma(0.4);
  sc.master_seed = 23;
  const SurvivalDataset data = sim::generate_dataset(sc, 0);

  EmConfig cfg;
  const EmFit res = em_fit_fixed_eta(data, 0.4, cfg);
  const Eigen::VectorXd w =
      em_weights(data, res.beta_hat, res.baseline_hat, 0.4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].status == 0 &&
        res.baseline_hat.cumulative(data[i].time) > 0.0) {
      CHECK(w[i] < 1.0);
    }
    CHECK(w[i] > 0.0);
  }
}

TEST_CASE("weights average near one at convergence") {
  sim::SimConfig sc;
  sc.n = 300;
  sc.frailty = sim::FrailtySpec::gamma(0.3);
  sc.master_seed = 29;
  const SurvivalDataset data = sim::generate_dataset(sc, 0);

  EmConfig cfg;
  const EmFit res = em_fit(data, cfg);
  REQUIRE(res.converged);
  const Eigen::VectorXd w =
      em_weights(data, res.beta_hat, res.baseline_hat, res.eta_hat);
  CHECK(std::abs(w.mean() - 1.0) < 0.05);
}

TEST_CASE("marginal log-likelihood never decreases across EM iterations") {
  sim::SimConfig sc;
  sc.n = 200;
  sc.frailty = sim::FrailtySpec::gamma(0.2);
  sc.master_seed = 31;
  const SurvivalDataset data = sim::generate_dataset(sc, 0);

  EmConfig cfg;
  for (double eta : {0.05, 0.2, 0.8}) {
    const EmFit res = em_fit_fixed_eta(data, eta, cfg);
    REQUIRE(res.loglik_trace.size() >= 2);
    for (std::size_t k = 1; k < res.loglik_trace.size(); ++k) {
      CHECK(res.loglik_trace[k] >= res.loglik_trace[k - 1] - 1e-10);
    }
  }
}

TEST_CASE("profiled eta is positive and the fit converges") {
  sim::SimConfig sc;
  sc.n = 250;
  sc.frailty = sim::FrailtySpec::gamma(0.4);
  sc.master_seed = 37;
  const SurvivalDataset data = sim::generate_dataset(sc, 0);

  EmConfig cfg;
  const EmFit res = em_fit(data, cfg);
  CHECK(res.converged);
  CHECK(res.eta_hat >= cfg.eta_min);
  CHECK(res.eta_hat <= cfg.eta_max);
  CHECK(std::isfinite(res.loglik));
}

}  // TEST_SUITE
