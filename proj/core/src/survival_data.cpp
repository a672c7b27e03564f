#include "lmfrail/survival_data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lmfrail {

SurvivalDataset::SurvivalDataset(std::vector<SurvivalRecord> records)
    : records_(std::move(records)) {
  if (records_.empty()) {
    throw std::invalid_argument("dataset has no records");
  }
  p_ = static_cast<int>(records_.front().covariates.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!(r.time > 0.0) || !std::isfinite(r.time)) {
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": time must be positive and finite");
    }
    if (r.status != 0 && r.status != 1) {
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": status must be 0 or 1");
    }
    if (static_cast<int>(r.covariates.size()) != p_) {
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": covariate length differs from dataset");
    }
    if (!r.covariates.allFinite()) {
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": nonfinite covariate");
    }
    n_events_ += r.status;
  }
  if (n_events_ == 0) {
    throw std::invalid_argument(
        "dataset has no events; the hazard scale is not identifiable");
  }
}

BaselineHazard BaselineHazard::constant_rate(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("baseline rate must be positive and finite");
  }
  BaselineHazard h;
  h.constant_ = true;
  h.rate_ = rate;
  return h;
}

BaselineHazard BaselineHazard::nonparametric(std::vector<HazardJump> jumps) {
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const auto& j = jumps[i];
    if (!(j.time > 0.0) || !std::isfinite(j.time)) {
      throw std::invalid_argument("jump " + std::to_string(i) +
                                  ": time must be positive and finite");
    }
    if (!(j.increment > 0.0) || !std::isfinite(j.increment)) {
      throw std::invalid_argument("jump " + std::to_string(i) +
                                  ": increment must be positive and finite");
    }
    if (i > 0 && !(jumps[i - 1].time < j.time)) {
      throw std::invalid_argument(
          "jump times must be strictly increasing (jump " +
          std::to_string(i) + ")");
    }
  }
  BaselineHazard h;
  h.constant_ = false;
  h.jumps_ = std::move(jumps);
  return h;
}

double BaselineHazard::rate() const {
  if (!constant_) {
    throw std::logic_error("rate() on a nonparametric baseline");
  }
  return rate_;
}

const std::vector<HazardJump>& BaselineHazard::jumps() const {
  if (constant_) {
    throw std::logic_error("jumps() on a constant-rate baseline");
  }
  return jumps_;
}

double BaselineHazard::cumulative(double t) const {
  if (constant_) return rate_ * t;
  double sum = 0.0;
  for (const auto& j : jumps_) {
    if (j.time > t) break;
    sum += j.increment;
  }
  return sum;
}

double BaselineHazard::hazard_mass(double t) const {
  if (constant_) return rate_;
  auto it = std::lower_bound(
      jumps_.begin(), jumps_.end(), t,
      [](const HazardJump& j, double v) { return j.time < v; });
  if (it != jumps_.end() && it->time == t) return it->increment;
  return 0.0;
}

}  // namespace lmfrail
