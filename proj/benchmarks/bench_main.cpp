#include <benchmark/benchmark.h>

#include <cmath>

#include "lmfrail/em_gamma.hpp"
#include "lmfrail/likelihood.hpp"
#include "lmfrail/manifold_opt.hpp"
#include "lmfrail/poly_roots.hpp"
#include "lmfrail/profile_fit.hpp"
#include "lmfrail/region.hpp"
#include "lmfrail/sim_bench.hpp"

using namespace lmfrail;

namespace {

SurvivalDataset bench_dataset(int n) {
  sim::SimConfig cfg;
  cfg.n = n;
  cfg.frailty = sim::FrailtySpec::gamma(0.2);
  cfg.master_seed = 1;
  return sim::generate_dataset(cfg, 0);
}

void BM_QuarticSignTest(benchmark::State& state) {
  const auto qc = region::q_coeffs({0.4, 0.1, 0.05});
  for (auto _ : state) {
    benchmark::DoNotOptimize(region::nonneg_on_positive_axis(qc));
  }
}
BENCHMARK(BM_QuarticSignTest);

void BM_Membership(benchmark::State& state) {
  const LmmParams lmm{0.4, 0.1, 0.05};
  for (auto _ : state) {
    benchmark::DoNotOptimize(region::is_member(lmm));
  }
}
BENCHMARK(BM_Membership);

void BM_BoundaryParam(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(region::boundary_param(4.0, 1.0));
  }
}
BENCHMARK(BM_BoundaryParam);

void BM_DoubleRoot(benchmark::State& state) {
  const LmmParams lmm = region::boundary_param(4.0, 1.0).lambda;
  for (auto _ : state) {
    benchmark::DoNotOptimize(region::double_root(lmm));
  }
}
BENCHMARK(BM_DoubleRoot);

void BM_QuinticRoots(benchmark::State& state) {
  const std::vector<double> c{1.0, -2.3, 0.7, 1.1, -0.4, 0.05};
  for (auto _ : state) {
    benchmark::DoNotOptimize(poly::real_roots(c));
  }
}
BENCHMARK(BM_QuinticRoots);

void BM_MixtureLoglik(benchmark::State& state) {
  const auto data = bench_dataset(static_cast<int>(state.range(0)));
  const RegressionParams params{Eigen::VectorXd::Constant(1, 0.9),
                                BaselineHazard::constant_rate(0.02)};
  const LikelihoodParts parts = prepare_likelihood(data, params);
  const LmmParams lmm{0.05, 0.0, 0.004};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixture_loglik(parts, lmm));
  }
}
BENCHMARK(BM_MixtureLoglik)->Arg(200)->Arg(1000);

void BM_MaximizeLambda(benchmark::State& state) {
  const auto data = bench_dataset(static_cast<int>(state.range(0)));
  Eigen::VectorXd beta(1);
  beta << 1.0986122886681098;
  const BaselineHazard baseline =
      breslow_lmm_update(data, beta, {0.0, 0.0, 0.0});
  const RegressionParams params{beta, baseline};
  OptimizerConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(maximize_lambda(data, params, cfg));
  }
}
BENCHMARK(BM_MaximizeLambda)->Arg(200);

void BM_BreslowUpdate(benchmark::State& state) {
  const auto data = bench_dataset(static_cast<int>(state.range(0)));
  Eigen::VectorXd beta(1);
  beta << 1.0986122886681098;
  const LmmParams lmm{0.05, 0.0, 0.004};
  for (auto _ : state) {
    benchmark::DoNotOptimize(breslow_lmm_update(data, beta, lmm));
  }
}
BENCHMARK(BM_BreslowUpdate)->Arg(200)->Arg(500);

void BM_ProfileFit(benchmark::State& state) {
  const auto data = bench_dataset(static_cast<int>(state.range(0)));
  FitConfig cfg;
  cfg.baseline_mode = BaselineMode::nonparametric;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(data, cfg));
  }
}
BENCHMARK(BM_ProfileFit)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_EmFit(benchmark::State& state) {
  const auto data = bench_dataset(static_cast<int>(state.range(0)));
  EmConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(em_fit(data, cfg));
  }
}
BENCHMARK(BM_EmFit)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
