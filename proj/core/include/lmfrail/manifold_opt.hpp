// Maximization of a concave objective over the feasible local-mixture
// region: interior Newton-Raphson until convergence or region exit,
// then projected Newton along the boundary with a retraction back onto
// it. Works on any objective supplying value/gradient/Hessian, so the
// likelihood can be swapped for surrogates in tests.
#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "lmfrail/survival_data.hpp"

namespace lmfrail {

struct OptimizerConfig {
  double tol_grad = 1e-7;  // on ||g|| (interior) or ||Pi g|| (boundary)
  int max_interior_iters = 100;
  int max_boundary_iters = 200;
  LmmParams init{0.01, 0.0, 0.001};
};

struct ObjectiveEval {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
};
using LambdaObjective = std::function<ObjectiveEval(const LmmParams&)>;

struct LambdaTracePoint {
  LmmParams lambda;
  double loglik = 0.0;
  double grad_norm = 0.0;  // projected norm once on the boundary
  bool on_boundary = false;
};

struct LambdaFit {
  LmmParams lambda_hat;
  bool on_boundary = false;
  double loglik = 0.0;
  int interior_iterations = 0;
  int boundary_iterations = 0;
  bool converged = false;
  std::vector<LambdaTracePoint> trace;
};

// First-order stationarity residual of `gradient` at `lambda` for
// maximization over the region: the gradient norm at interior points,
// the supporting-plane projected norm on the boundary sheet or the
// lambda4 face, and the normal-cone condition at points where both are
// active. Converged fits satisfy residual < tol_grad.
double stationarity_residual(const LmmParams& lambda,
                             const Eigen::Vector3d& gradient);

// Maximize a concave objective over the region. Non-convergence within
// the iteration budgets is reported through converged = false, never an
// exception; structural failures (degenerate normals) propagate.
LambdaFit maximize(const LambdaObjective& objective,
                   const OptimizerConfig& config);

// Maximize the local-mixture log-likelihood in lambda for fixed
// regression parameters and baseline.
LambdaFit maximize_lambda(const SurvivalDataset& data,
                          const RegressionParams& params,
                          const OptimizerConfig& config);

}  // namespace lmfrail
