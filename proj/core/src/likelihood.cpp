#include "lmfrail/likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lmfrail/errors.hpp"

namespace lmfrail {

double linear_predictor(const SurvivalRecord& record,
                        const RegressionParams& params) {
  const double xb =
      record.covariates.size() > 0 ? params.beta.dot(record.covariates) : 0.0;
  const double base = params.baseline.is_constant()
                          ? params.baseline.rate() * record.time
                          : params.baseline.cumulative(record.time);
  const double y = base * std::exp(xb);
  if (!std::isfinite(y) || y < 0.0) {
    throw std::invalid_argument("nonfinite or negative linear predictor y = " +
                                std::to_string(y));
  }
  return y;
}

MixtureTerms mixture_terms(int status, double y) {
  const double y2 = y * y;
  const double y3 = y2 * y;
  if (status == 0) {
    return {y2, -y3, y3 * y};  // (-y)^j
  }
  // (-y)^(j-1) (j - y)
  return {y2 - 2.0 * y, y2 * (3.0 - y), -y3 * (4.0 - y)};
}

LikelihoodParts prepare_likelihood(const SurvivalDataset& data,
                                   const RegressionParams& params) {
  if (params.beta.size() != data.covariate_dim()) {
    throw std::invalid_argument("beta length does not match covariate_dim");
  }
  LikelihoodParts parts;
  parts.terms.reserve(data.size());
  double base = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& rec = data[i];
    const double xb =
        rec.covariates.size() > 0 ? params.beta.dot(rec.covariates) : 0.0;
    const double cum = params.baseline.is_constant()
                           ? params.baseline.rate() * rec.time
                           : params.baseline.cumulative(rec.time);
    const double y = cum * std::exp(xb);
    if (!std::isfinite(y) || y < 0.0) {
      throw std::invalid_argument("nonfinite linear predictor at record " +
                                  std::to_string(i));
    }
    if (rec.status == 1) {
      const double mass = params.baseline.hazard_mass(rec.time);
      if (!(mass > 0.0)) {
        throw std::invalid_argument(
            "zero baseline hazard mass at event record " + std::to_string(i));
      }
      base += std::log(mass) + xb;
    }
    base -= y;
    parts.terms.push_back(mixture_terms(rec.status, y));
  }
  parts.base_loglik = base;
  return parts;
}

double mixture_loglik(const LikelihoodParts& parts, const LmmParams& lmm) {
  double sum = parts.base_loglik;
  for (std::size_t i = 0; i < parts.terms.size(); ++i) {
    const auto& a = parts.terms[i];
    const double factor =
        1.0 + lmm.lambda2 * a.a2 + lmm.lambda3 * a.a3 + lmm.lambda4 * a.a4;
    if (!(factor > 0.0)) {
      throw BoundaryViolation(static_cast<int>(i), factor);
    }
    sum += std::log(factor);
  }
  return sum;
}

std::pair<Eigen::Vector3d, Eigen::Matrix3d> mixture_derivatives(
    const LikelihoodParts& parts, const LmmParams& lmm) {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < parts.terms.size(); ++i) {
    const auto& t = parts.terms[i];
    const double factor =
        1.0 + lmm.lambda2 * t.a2 + lmm.lambda3 * t.a3 + lmm.lambda4 * t.a4;
    if (!(factor > 0.0)) {
      throw BoundaryViolation(static_cast<int>(i), factor);
    }
    const Eigen::Vector3d a(t.a2, t.a3, t.a4);
    g += a / factor;
    h -= (a * a.transpose()) / (factor * factor);
  }
  return {g, h};
}

double log_likelihood(const SurvivalDataset& data,
                      const RegressionParams& params, const LmmParams& lmm) {
  return mixture_loglik(prepare_likelihood(data, params), lmm);
}

std::pair<Eigen::Vector3d, Eigen::Matrix3d> lmm_gradient_hessian(
    const SurvivalDataset& data, const RegressionParams& params,
    const LmmParams& lmm) {
  return mixture_derivatives(prepare_likelihood(data, params), lmm);
}

}  // namespace lmfrail
