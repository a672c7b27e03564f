#include "lmfrail/profile_fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lmfrail/errors.hpp"
#include "lmfrail/likelihood.hpp"
#include "lmfrail/poly_roots.hpp"
#include "lmfrail/region.hpp"

namespace lmfrail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ascending coefficients of the per-record mixture factor as a
// polynomial in y: the event variant for status 1, the censored one
// for status 0.
std::array<double, 5> factor_coeffs(int status, const LmmParams& m) {
  if (status == 1) {
    return {1.0, -2.0 * m.lambda2, m.lambda2 + 3.0 * m.lambda3,
            -(m.lambda3 + 4.0 * m.lambda4), m.lambda4};
  }
  return {1.0, 0.0, m.lambda2, -m.lambda3, m.lambda4};
}

double horner(const std::array<double, 5>& c, int deg, double y) {
  double v = 0.0;
  for (int k = deg; k >= 0; --k) v = v * y + c[k];
  return v;
}

double poly_value(const std::array<double, 5>& c, double y) {
  return horner(c, 4, y);
}

double poly_deriv(const std::array<double, 5>& c, double y) {
  const std::array<double, 5> d{c[1], 2.0 * c[2], 3.0 * c[3], 4.0 * c[4],
                                0.0};
  return horner(d, 3, y);
}

double poly_second(const std::array<double, 5>& c, double y) {
  const std::array<double, 5> d{2.0 * c[2], 6.0 * c[3], 12.0 * c[4], 0.0,
                                0.0};
  return horner(d, 2, y);
}

struct SortedView {
  std::vector<int> order;        // dataset indices sorted by time (stable)
  std::vector<int> risk_start;   // first sorted position of each tie block
  std::vector<double> relrisk;   // exp(X beta), sorted order
  std::vector<double> suffix;    // suffix sums of relrisk
};

SortedView sort_by_time(const SurvivalDataset& data,
                        const Eigen::VectorXd& beta) {
  const int n = static_cast<int>(data.size());
  SortedView v;
  v.order.resize(n);
  std::iota(v.order.begin(), v.order.end(), 0);
  std::stable_sort(v.order.begin(), v.order.end(), [&](int a, int b) {
    return data[a].time < data[b].time;
  });
  v.relrisk.resize(n);
  for (int k = 0; k < n; ++k) {
    const auto& rec = data[v.order[k]];
    const double xb =
        rec.covariates.size() > 0 ? beta.dot(rec.covariates) : 0.0;
    v.relrisk[k] = std::exp(xb);
  }
  v.suffix.assign(n + 1, 0.0);
  for (int k = n - 1; k >= 0; --k) {
    v.suffix[k] = v.suffix[k + 1] + v.relrisk[k];
  }
  v.risk_start.resize(n);
  for (int k = 0; k < n; ++k) {
    v.risk_start[k] =
        (k > 0 && data[v.order[k]].time == data[v.order[k - 1]].time)
            ? v.risk_start[k - 1]
            : k;
  }
  return v;
}

}  // namespace

double impute_constant_rate(const SurvivalDataset& data,
                            const Eigen::VectorXd& beta,
                            const LmmParams& lmm) {
  if (beta.size() != data.covariate_dim()) {
    throw std::invalid_argument("beta length does not match covariate_dim");
  }
  const int n = static_cast<int>(data.size());
  const double n_events = data.n_events();
  std::vector<double> scaled_time(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& rec = data[i];
    const double xb =
        rec.covariates.size() > 0 ? beta.dot(rec.covariates) : 0.0;
    scaled_time[i] = rec.time * std::exp(xb);
    total += scaled_time[i];
  }

  const std::array<double, 5> qc = factor_coeffs(1, lmm);
  const std::array<double, 5> pc = factor_coeffs(0, lmm);

  // Score of the log-likelihood in the log rate u.
  const auto score = [&](double u) {
    const double rate = std::exp(u);
    double s = n_events;
    for (int i = 0; i < n; ++i) {
      const double y = rate * scaled_time[i];
      const auto& c = data[i].status == 1 ? qc : pc;
      const double r = std::max(poly_value(c, y), 1e-300);
      s += -y + y * poly_deriv(c, y) / r;
    }
    return s;
  };
  const auto dscore = [&](double u) {
    const double rate = std::exp(u);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double y = rate * scaled_time[i];
      const auto& c = data[i].status == 1 ? qc : pc;
      const double r = std::max(poly_value(c, y), 1e-300);
      const double r1 = poly_deriv(c, y);
      const double r2 = poly_second(c, y);
      const double phi_prime =
          r1 / r + y * r2 / r - y * (r1 / r) * (r1 / r);
      s += -y + phi_prime * y;
    }
    return s;
  };

  const double u0 = std::log(n_events / total);
  double f0 = score(u0);
  if (std::abs(f0) <= 1e-12) return std::exp(u0);

  double lo = u0, hi = u0;
  if (f0 > 0.0) {
    for (int k = 0; k < 120 && score(hi) > 0.0; ++k) hi += 1.0;
    if (score(hi) > 0.0) throw SolveFailure("constant-rate score not bracketable");
  } else {
    for (int k = 0; k < 120 && score(lo) < 0.0; ++k) lo -= 1.0;
    if (score(lo) < 0.0) throw SolveFailure("constant-rate score not bracketable");
  }

  double u = std::clamp(u0, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double f = score(u);
    if (std::abs(f) < 1e-10) break;
    if (f > 0.0) {
      lo = u;
    } else {
      hi = u;
    }
    const double df = dscore(u);
    double cand = df != 0.0 ? u - f / df : u;
    if (!std::isfinite(cand) || cand <= lo || cand >= hi) {
      cand = 0.5 * (lo + hi);
    }
    if (hi - lo < 1e-15) break;
    u = cand;
  }
  return std::exp(u);
}

BaselineHazard breslow_lmm_update(const SurvivalDataset& data,
                                  const Eigen::VectorXd& beta,
                                  const LmmParams& lmm) {
  if (beta.size() != data.covariate_dim()) {
    throw std::invalid_argument("beta length does not match covariate_dim");
  }
  const int n = static_cast<int>(data.size());
  const SortedView v = sort_by_time(data, beta);
  const std::array<double, 5> qc = factor_coeffs(1, lmm);

  std::vector<HazardJump> jumps;
  double cum = 0.0;
  for (int k = 0; k < n; ++k) {
    const int idx = v.order[k];
    const auto& rec = data[idx];
    if (rec.status != 1) continue;
    const double s0 = v.suffix[v.risk_start[k]];
    const double w = v.relrisk[k];
    const double u0 = w * cum;

    // Stationarity polynomial in the increment D:
    //   q(u) - s0 D q(u) + w D q'(u) = 0,  u = u0 + w D,
    // assembled by expanding q and q' in powers of D.
    std::array<double, 5> upow_g{};  // coefficients of q(u0 + w D)
    std::array<double, 5> upow_h{};  // coefficients of q'(u0 + w D)
    {
      // (u0 + w D)^r, built iteratively.
      std::array<double, 5> pr{1.0, 0.0, 0.0, 0.0, 0.0};
      for (int r = 0; r <= 4; ++r) {
        for (int j = 0; j <= r; ++j) {
          upow_g[j] += qc[r] * pr[j];
          if (r <= 3) upow_h[j] += (r + 1) * qc[r + 1] * pr[j];
        }
        if (r < 4) {
          std::array<double, 5> next{};
          for (int j = 0; j <= r; ++j) {
            next[j] += pr[j] * u0;
            next[j + 1] += pr[j] * w;
          }
          pr = next;
        }
      }
    }
    std::vector<double> F(6, 0.0);
    for (int j = 0; j <= 4; ++j) F[j] += upow_g[j];
    for (int j = 0; j <= 4; ++j) F[j + 1] -= s0 * upow_g[j];
    for (int j = 0; j <= 3; ++j) F[j + 1] += w * upow_h[j];

    const auto score = [&](double dl) {
      const double u = u0 + w * dl;
      const double qv = poly_value(qc, u);
      if (!(qv > 0.0)) return std::numeric_limits<double>::quiet_NaN();
      return 1.0 / dl - s0 + w * poly_deriv(qc, u) / qv;
    };

    double best_dl = -1.0;
    double best_val = -kInf;
    for (double dl : poly::real_roots(F)) {
      if (!(dl > 0.0) || !std::isfinite(dl)) continue;
      // Polish on the score itself.
      for (int it = 0; it < 4; ++it) {
        const double u = u0 + w * dl;
        const double qv = poly_value(qc, u);
        if (!(qv > 0.0)) break;
        const double q1 = poly_deriv(qc, u);
        const double sc = 1.0 / dl - s0 + w * q1 / qv;
        const double dsc = -1.0 / (dl * dl) +
                           w * w *
                               (poly_second(qc, u) * qv - q1 * q1) /
                               (qv * qv);
        if (dsc == 0.0 || !std::isfinite(sc)) break;
        const double nd = dl - sc / dsc;
        if (!(nd > 0.0) || !std::isfinite(nd)) break;
        dl = nd;
      }
      const double u = u0 + w * dl;
      const double qv = poly_value(qc, u);
      if (!(qv > 0.0)) continue;
      const double sc = score(dl);
      if (!std::isfinite(sc) || std::abs(sc) > 1e-6 * (1.0 + s0)) continue;
      const double val = std::log(dl) - dl * s0 + std::log(qv);
      if (val > best_val) {
        best_val = val;
        best_dl = dl;
      }
    }
    if (!(best_dl > 0.0)) {
      throw NoAdmissibleRoot(idx);
    }
    cum += best_dl;
    if (!jumps.empty() && jumps.back().time == rec.time) {
      jumps.back().increment += best_dl;
    } else {
      jumps.push_back({rec.time, best_dl});
    }
  }
  return BaselineHazard::nonparametric(std::move(jumps));
}

ProfilePoint profile_loglik(const SurvivalDataset& data,
                            const Eigen::VectorXd& beta,
                            const FitConfig& config) {
  const auto impute = [&](const LmmParams& lmm) {
    return config.baseline_mode == BaselineMode::constant_rate
               ? BaselineHazard::constant_rate(
                     impute_constant_rate(data, beta, lmm))
               : breslow_lmm_update(data, beta, lmm);
  };

  ProfilePoint out;
  if (config.fixed_lambda) {
    out.lambda = *config.fixed_lambda;
    if (!region::is_member(out.lambda)) {
      throw std::invalid_argument("fixed_lambda is not a region member");
    }
    out.baseline = impute(out.lambda);
    out.loglik =
        log_likelihood(data, {beta, out.baseline}, out.lambda);
    out.lambda_converged = true;
    return out;
  }

  LmmParams lmm{0.0, 0.0, 0.0};
  OptimizerConfig ocfg = config.optimizer;
  for (int round = 0; round < 2; ++round) {
    out.baseline = impute(lmm);
    const LambdaFit lf =
        maximize_lambda(data, {beta, out.baseline}, ocfg);
    lmm = lf.lambda_hat;
    out.lambda = lmm;
    out.loglik = lf.loglik;
    out.lambda_on_boundary = lf.on_boundary;
    out.lambda_converged = lf.converged;
    // Warm start the second round just inside the first optimum.
    ocfg.init = LmmParams::from_vec(0.95 * lmm.vec());
  }
  return out;
}

namespace {

// Profile objective with exception translation for search probes.
double profile_value(const SurvivalDataset& data, const Eigen::VectorXd& beta,
                     const FitConfig& config, bool* failed) {
  try {
    *failed = false;
    return profile_loglik(data, beta, config).loglik;
  } catch (const std::exception&) {
    *failed = true;
    return -kInf;
  }
}

Eigen::VectorXd profile_gradient(const SurvivalDataset& data,
                                 const Eigen::VectorXd& beta,
                                 const FitConfig& config) {
  const int p = static_cast<int>(beta.size());
  Eigen::VectorXd g(p);
  for (int j = 0; j < p; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(beta[j]));
    Eigen::VectorXd bp = beta, bm = beta;
    bp[j] += h;
    bm[j] -= h;
    bool fail_p = false, fail_m = false;
    const double fp = profile_value(data, bp, config, &fail_p);
    const double fm = profile_value(data, bm, config, &fail_m);
    if (!fail_p && !fail_m) {
      g[j] = (fp - fm) / (2.0 * h);
    } else if (!fail_p || !fail_m) {
      bool fail_c = false;
      const double fc = profile_value(data, beta, config, &fail_c);
      if (fail_c) {
        std::ostringstream os;
        os << "profile evaluation failed at beta = " << beta.transpose();
        throw SolveFailure(os.str());
      }
      g[j] = fail_p ? (fc - fm) / h : (fp - fc) / h;
    } else {
      std::ostringstream os;
      os << "profile gradient failed at beta = " << beta.transpose();
      throw SolveFailure(os.str());
    }
  }
  return g;
}

}  // namespace

FitResult fit(const SurvivalDataset& data, const FitConfig& config) {
  if (data.n_events() == 0) {
    throw std::invalid_argument("no events: hazard scale not identifiable");
  }
  if (!(config.beta_tol > 0.0)) {
    throw std::invalid_argument("beta_tol must be positive");
  }
  const int p = data.covariate_dim();
  Eigen::VectorXd beta = config.beta_init.size() > 0
                             ? config.beta_init
                             : Eigen::VectorXd::Zero(p);
  if (static_cast<int>(beta.size()) != p) {
    throw std::invalid_argument("beta_init length does not match data");
  }

  FitResult res;
  if (p == 0) {
    const ProfilePoint pp = profile_loglik(data, beta, config);
    res.beta_hat = beta;
    res.lambda_hat = pp.lambda;
    res.baseline_hat = pp.baseline;
    res.profile_loglik = pp.loglik;
    res.lambda_on_boundary = pp.lambda_on_boundary;
    res.converged = pp.lambda_converged;
    res.trace.push_back({beta, pp.loglik});
    return res;
  }

  double f = 0.0;
  try {
    f = profile_loglik(data, beta, config).loglik;
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "profile evaluation failed at beta = " << beta.transpose() << ": "
       << e.what();
    throw SolveFailure(os.str());
  }
  Eigen::VectorXd g = profile_gradient(data, beta, config);
  Eigen::MatrixXd binv = Eigen::MatrixXd::Identity(p, p);
  res.trace.push_back({beta, f});

  bool outer_converged = false;
  for (int iter = 0; iter < config.max_outer_iters; ++iter) {
    Eigen::VectorXd dir = binv * g;
    bool steepest = false;
    if (dir.dot(g) <= 0.0) {
      binv = Eigen::MatrixXd::Identity(p, p);
      dir = g;
      steepest = true;
    }
    if (g.lpNorm<Eigen::Infinity>() < 1e-9) {
      outer_converged = true;
      break;
    }
    // Cap the per-iteration move: profile objectives can have remote
    // spurious branches, and a huge first step from a raw gradient can
    // vault over the maximum onto one of them.
    constexpr double kMaxStep = 0.5;
    if (dir.lpNorm<Eigen::Infinity>() > kMaxStep) {
      dir *= kMaxStep / dir.lpNorm<Eigen::Infinity>();
    }

    double t = 1.0;
    double fc = -kInf;
    bool accepted = false;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      bool failed = false;
      fc = profile_value(data, beta + t * dir, config, &failed);
      if (!failed && fc >= f + 1e-4 * t * dir.dot(g)) {
        accepted = true;
        break;
      }
    }
    if (!accepted && !steepest) {
      dir = g;
      t = 1.0;
      for (int h = 0; h < 30; ++h, t *= 0.5) {
        bool failed = false;
        fc = profile_value(data, beta + t * dir, config, &failed);
        if (!failed && fc >= f + 1e-4 * t * dir.dot(g)) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;

    const Eigen::VectorXd step = t * dir;
    const Eigen::VectorXd beta_new = beta + step;
    const bool small = step.lpNorm<Eigen::Infinity>() < config.beta_tol;

    const Eigen::VectorXd g_new = profile_gradient(data, beta_new, config);
    const Eigen::VectorXd yk = g - g_new;  // gradient change of -profile
    const double sy = step.dot(yk);
    if (sy > 1e-12 * step.norm() * yk.norm()) {
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
      const Eigen::MatrixXd left = eye - step * yk.transpose() / sy;
      binv = left * binv * left.transpose() +
             step * step.transpose() / sy;
    }
    beta = beta_new;
    f = fc;
    g = g_new;
    res.trace.push_back({beta, f});
    if (small) {
      outer_converged = true;
      break;
    }
  }

  const ProfilePoint pp = profile_loglik(data, beta, config);
  res.beta_hat = beta;
  res.lambda_hat = pp.lambda;
  res.baseline_hat = pp.baseline;
  res.profile_loglik = pp.loglik;
  res.lambda_on_boundary = pp.lambda_on_boundary;
  res.converged = outer_converged && pp.lambda_converged;
  return res;
}

}  // namespace lmfrail
