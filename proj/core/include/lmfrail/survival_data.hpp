// Survival data containers and the parameter types shared across the
// library: records, datasets, baseline hazards, regression and local
// mixture parameters.
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace lmfrail {

// One observation: follow-up time T_i = min(event time, censoring time),
// event indicator, and covariate row.
struct SurvivalRecord {
  double time = 0.0;
  int status = 0;  // 1 = event observed, 0 = censored
  Eigen::VectorXd covariates;
};

// Immutable collection of records sharing one covariate dimension.
// Construction validates: nonempty, time > 0, status in {0,1}, uniform
// covariate length, and at least one observed event.
class SurvivalDataset {
 public:
  explicit SurvivalDataset(std::vector<SurvivalRecord> records);

  std::size_t size() const noexcept { return records_.size(); }
  int covariate_dim() const noexcept { return p_; }
  int n_events() const noexcept { return n_events_; }
  const SurvivalRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<SurvivalRecord>& records() const noexcept {
    return records_;
  }
  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

 private:
  std::vector<SurvivalRecord> records_;
  int p_ = 0;
  int n_events_ = 0;
};

struct HazardJump {
  double time = 0.0;
  double increment = 0.0;
};

// Baseline hazard: either a constant rate (exponential lifetimes) or a
// nondecreasing step function given by positive increments at strictly
// increasing event times, with cumulative value 0 at t = 0.
class BaselineHazard {
 public:
  static BaselineHazard constant_rate(double rate);
  static BaselineHazard nonparametric(std::vector<HazardJump> jumps);

  bool is_constant() const noexcept { return constant_; }
  double rate() const;
  const std::vector<HazardJump>& jumps() const;

  // Cumulative hazard at t: rate * t, or the sum of increments at jump
  // times <= t.
  double cumulative(double t) const;

  // Hazard mass used in event log terms: the rate, or the increment at
  // exactly time t (0 when no jump sits there).
  double hazard_mass(double t) const;

 private:
  BaselineHazard() = default;
  bool constant_ = true;
  double rate_ = 1.0;
  std::vector<HazardJump> jumps_;
};

struct RegressionParams {
  Eigen::VectorXd beta;
  BaselineHazard baseline = BaselineHazard::constant_rate(1.0);
};

// Local mixture parameters (lambda_2, lambda_3, lambda_4). The expansion
// order is fixed at 4 and the expansion point at mean frailty 1; the
// first-order coefficient is identically absent.
struct LmmParams {
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double lambda4 = 0.0;

  Eigen::Vector3d vec() const { return {lambda2, lambda3, lambda4}; }
  static LmmParams from_vec(const Eigen::Vector3d& v) {
    return {v[0], v[1], v[2]};
  }
};

// Values A_2, A_3, A_4 multiplying lambda in the per-record local
// mixture factor 1 + lambda2 A_2 + lambda3 A_3 + lambda4 A_4.
struct MixtureTerms {
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
};

}  // namespace lmfrail
