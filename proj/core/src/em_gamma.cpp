#include "lmfrail/em_gamma.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lmfrail/errors.hpp"

namespace lmfrail {

namespace {

struct SortedData {
  int n = 0, p = 0;
  std::vector<int> order;       // dataset indices sorted by time
  std::vector<double> time;     // sorted
  std::vector<int> status;      // sorted
  Eigen::MatrixXd x;            // n x p, sorted
  std::vector<int> risk_start;  // first sorted position of each tie block
};

SortedData sort_data(const SurvivalDataset& data) {
  SortedData sd;
  sd.n = static_cast<int>(data.size());
  sd.p = data.covariate_dim();
  sd.order.resize(sd.n);
  std::iota(sd.order.begin(), sd.order.end(), 0);
  std::stable_sort(sd.order.begin(), sd.order.end(), [&](int a, int b) {
    return data[a].time < data[b].time;
  });
  sd.time.resize(sd.n);
  sd.status.resize(sd.n);
  sd.x.resize(sd.n, sd.p);
  for (int k = 0; k < sd.n; ++k) {
    const auto& rec = data[sd.order[k]];
    sd.time[k] = rec.time;
    sd.status[k] = rec.status;
    if (sd.p > 0) sd.x.row(k) = rec.covariates.transpose();
  }
  sd.risk_start.resize(sd.n);
  for (int k = 0; k < sd.n; ++k) {
    sd.risk_start[k] = (k > 0 && sd.time[k] == sd.time[k - 1])
                           ? sd.risk_start[k - 1]
                           : k;
  }
  return sd;
}

// Weighted Breslow increments: one jump per distinct event time,
// d_t / sum_{risk set} w exp(X beta).
BaselineHazard weighted_breslow(const SortedData& sd,
                                const Eigen::VectorXd& w_sorted,
                                const Eigen::VectorXd& beta) {
  Eigen::VectorXd wex(sd.n);
  for (int k = 0; k < sd.n; ++k) {
    const double xb = sd.p > 0 ? sd.x.row(k).dot(beta) : 0.0;
    wex[k] = w_sorted[k] * std::exp(xb);
  }
  std::vector<double> suffix(sd.n + 1, 0.0);
  for (int k = sd.n - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + wex[k];

  std::vector<HazardJump> jumps;
  int k = 0;
  while (k < sd.n) {
    int j = k;
    int d = 0;
    while (j < sd.n && sd.time[j] == sd.time[k]) {
      d += sd.status[j];
      ++j;
    }
    if (d > 0) {
      jumps.push_back({sd.time[k], d / suffix[sd.risk_start[k]]});
    }
    k = j;
  }
  return BaselineHazard::nonparametric(std::move(jumps));
}

double weighted_partial_loglik(const SortedData& sd,
                               const Eigen::VectorXd& w_sorted,
                               const Eigen::VectorXd& beta) {
  Eigen::VectorXd wex(sd.n);
  for (int k = 0; k < sd.n; ++k) {
    const double xb = sd.p > 0 ? sd.x.row(k).dot(beta) : 0.0;
    wex[k] = w_sorted[k] * std::exp(xb);
  }
  std::vector<double> suffix(sd.n + 1, 0.0);
  for (int k = sd.n - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + wex[k];
  double ll = 0.0;
  for (int k = 0; k < sd.n; ++k) {
    if (sd.status[k] != 1) continue;
    const double xb = sd.p > 0 ? sd.x.row(k).dot(beta) : 0.0;
    ll += xb - std::log(suffix[sd.risk_start[k]]);
  }
  return ll;
}

// Newton on the weighted Cox partial likelihood.
Eigen::VectorXd weighted_cox(const SortedData& sd,
                             const Eigen::VectorXd& w_sorted,
                             Eigen::VectorXd beta) {
  if (sd.p == 0) return beta;
  double ll = weighted_partial_loglik(sd, w_sorted, beta);
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd wex(sd.n);
    for (int k = 0; k < sd.n; ++k) {
      const double xb = sd.x.row(k).dot(beta);
      wex[k] = w_sorted[k] * std::exp(xb);
    }
    std::vector<double> s0(sd.n + 1, 0.0);
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(sd.p, sd.n + 1);
    std::vector<Eigen::MatrixXd> s2(
        sd.n + 1, Eigen::MatrixXd::Zero(sd.p, sd.p));
    for (int k = sd.n - 1; k >= 0; --k) {
      s0[k] = s0[k + 1] + wex[k];
      s1.col(k) = s1.col(k + 1) + wex[k] * sd.x.row(k).transpose();
      s2[k] = s2[k + 1] +
              wex[k] * sd.x.row(k).transpose() * sd.x.row(k);
    }
    Eigen::VectorXd score = Eigen::VectorXd::Zero(sd.p);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(sd.p, sd.p);
    for (int k = 0; k < sd.n; ++k) {
      if (sd.status[k] != 1) continue;
      const int r = sd.risk_start[k];
      const Eigen::VectorXd mean = s1.col(r) / s0[r];
      score += sd.x.row(k).transpose() - mean;
      info += s2[r] / s0[r] - mean * mean.transpose();
    }
    info.diagonal().array() += 1e-10;
    Eigen::VectorXd step = info.ldlt().solve(score);
    if (!step.allFinite()) break;
    double t = 1.0;
    double ll_new = ll;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      ll_new = weighted_partial_loglik(sd, w_sorted, beta + t * step);
      if (ll_new >= ll - 1e-12) break;
    }
    beta += t * step;
    const bool done = (t * step).lpNorm<Eigen::Infinity>() < 1e-10;
    ll = ll_new;
    if (done) break;
  }
  return beta;
}

Eigen::VectorXd estep_sorted(const SortedData& sd,
                             const Eigen::VectorXd& beta,
                             const BaselineHazard& baseline, double eta) {
  Eigen::VectorXd w(sd.n);
  const double inv_eta = 1.0 / eta;
  for (int k = 0; k < sd.n; ++k) {
    const double xb = sd.p > 0 ? sd.x.row(k).dot(beta) : 0.0;
    const double m = baseline.cumulative(sd.time[k]) * std::exp(xb);
    w[k] = (sd.status[k] + inv_eta) / (inv_eta + m);
  }
  return w;
}

double marginal_loglik(const SortedData& sd, const Eigen::VectorXd& beta,
                       const BaselineHazard& baseline, double eta) {
  double ll = 0.0;
  for (int k = 0; k < sd.n; ++k) {
    const double xb = sd.p > 0 ? sd.x.row(k).dot(beta) : 0.0;
    const double m = baseline.cumulative(sd.time[k]) * std::exp(xb);
    if (sd.status[k] == 1) {
      const double mass = baseline.hazard_mass(sd.time[k]);
      ll += std::log(mass) + xb;
    }
    ll -= (1.0 / eta + sd.status[k]) * std::log1p(eta * m);
  }
  return ll;
}

std::vector<double> jump_values(const BaselineHazard& b) {
  std::vector<double> v;
  for (const auto& j : b.jumps()) v.push_back(j.increment);
  return v;
}

}  // namespace

Eigen::VectorXd em_weights(const SurvivalDataset& data,
                           const Eigen::VectorXd& beta,
                           const BaselineHazard& baseline, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const double inv_eta = 1.0 / eta;
  Eigen::VectorXd w(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& rec = data[i];
    const double xb =
        rec.covariates.size() > 0 ? beta.dot(rec.covariates) : 0.0;
    const double m = baseline.cumulative(rec.time) * std::exp(xb);
    w[i] = (rec.status + inv_eta) / (inv_eta + m);
  }
  return w;
}

EmFit em_fit_fixed_eta(const SurvivalDataset& data, double eta,
                       const EmConfig& config) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const SortedData sd = sort_data(data);

  EmFit fit;
  fit.eta_hat = eta;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(sd.p);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(sd.n);
  BaselineHazard baseline = weighted_breslow(sd, w, beta);
  fit.loglik_trace.push_back(marginal_loglik(sd, beta, baseline, eta));

  std::vector<double> prev_jumps = jump_values(baseline);
  for (int it = 0; it < config.max_em_iters; ++it) {
    ++fit.iterations;
    w = estep_sorted(sd, beta, baseline, eta);
    const Eigen::VectorXd beta_new = weighted_cox(sd, w, beta);
    baseline = weighted_breslow(sd, w, beta_new);

    const std::vector<double> cur_jumps = jump_values(baseline);
    double delta = (beta_new - beta).lpNorm<Eigen::Infinity>();
    if (cur_jumps.size() == prev_jumps.size()) {
      for (std::size_t j = 0; j < cur_jumps.size(); ++j) {
        delta = std::max(delta, std::abs(cur_jumps[j] - prev_jumps[j]));
      }
    }
    beta = beta_new;
    prev_jumps = cur_jumps;
    fit.loglik_trace.push_back(marginal_loglik(sd, beta, baseline, eta));
    if (delta < config.tol) {
      fit.converged = true;
      break;
    }
  }

  fit.beta_hat = beta;
  fit.baseline_hat = baseline;
  fit.loglik = fit.loglik_trace.back();
  return fit;
}

EmFit em_fit(const SurvivalDataset& data, const EmConfig& config) {
  if (!(config.eta_min > 0.0) || !(config.eta_max > config.eta_min)) {
    throw std::invalid_argument("invalid eta grid bounds");
  }
  std::vector<double> grid;
  const int k = std::max(config.eta_grid_size, 2);
  for (int i = 0; i < k; ++i) {
    const double t = static_cast<double>(i) / (k - 1);
    grid.push_back(config.eta_min *
                   std::pow(config.eta_max / config.eta_min, t));
  }

  EmFit best;
  best.loglik = -std::numeric_limits<double>::infinity();
  int best_idx = -1;
  std::vector<EmFit> fits;
  fits.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    fits.push_back(em_fit_fixed_eta(data, grid[i], config));
    if (fits.back().loglik > best.loglik) {
      best = fits.back();
      best_idx = static_cast<int>(i);
    }
  }

  // One refinement pass between the neighbors of the best grid point.
  const double lo = best_idx > 0 ? grid[best_idx - 1] : grid[best_idx];
  const double hi = best_idx + 1 < static_cast<int>(grid.size())
                        ? grid[best_idx + 1]
                        : grid[best_idx];
  if (hi > lo) {
    for (int i = 1; i <= config.eta_refine_points; ++i) {
      const double eta =
          lo + (hi - lo) * i / (config.eta_refine_points + 1.0);
      EmFit f = em_fit_fixed_eta(data, eta, config);
      if (f.loglik > best.loglik) best = f;
    }
  }
  return best;
}

}  // namespace lmfrail
