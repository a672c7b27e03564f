// Local-mixture log-likelihood for frailty survival regression with a
// constant-rate or step-function baseline, with analytic gradient and
// Hessian in the mixture parameters.
#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

#include "lmfrail/survival_data.hpp"

namespace lmfrail {

// y_i: cumulative baseline hazard at T_i times exp(X_i beta).
double linear_predictor(const SurvivalRecord& record,
                        const RegressionParams& params);

// Closed-form ratios of theta-derivatives of the conditional density to
// the density itself, at mean frailty:
//   censored: A_j = (-y)^j
//   event:    A_j = (-y)^(j-1) (j - y)
MixtureTerms mixture_terms(int status, double y);

// Per-record quantities that do not depend on the mixture parameters;
// computed once so the inner lambda optimization is O(n) per step.
struct LikelihoodParts {
  double base_loglik = 0.0;  // sum delta (log lam0 + X beta) - sum y
  std::vector<MixtureTerms> terms;
};
LikelihoodParts prepare_likelihood(const SurvivalDataset& data,
                                   const RegressionParams& params);

// base_loglik + sum log(1 + lambda . A_i). Throws BoundaryViolation with
// the record index if a mixture factor is nonpositive.
double mixture_loglik(const LikelihoodParts& parts, const LmmParams& lmm);

// Gradient g_j = sum A_j / D_i and Hessian H_jk = -sum A_j A_k / D_i^2
// of the mixture sum, D_i = 1 + lambda . A_i. The Hessian is negative
// semidefinite everywhere in the interior.
std::pair<Eigen::Vector3d, Eigen::Matrix3d> mixture_derivatives(
    const LikelihoodParts& parts, const LmmParams& lmm);

double log_likelihood(const SurvivalDataset& data,
                      const RegressionParams& params, const LmmParams& lmm);

std::pair<Eigen::Vector3d, Eigen::Matrix3d> lmm_gradient_hessian(
    const SurvivalDataset& data, const RegressionParams& params,
    const LmmParams& lmm);

}  // namespace lmfrail
