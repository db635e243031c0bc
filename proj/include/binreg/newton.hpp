#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "binreg/model.hpp"

namespace binreg {

struct MapResult {
  Eigen::VectorXd beta_map;
  Eigen::MatrixXd hessian_at_mode;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;  // inf-norm at exit
  double log_posterior = 0.0;
};

struct NewtonOptions {
  double tol = 1e-8;  // on the gradient inf-norm
  int max_iter = 100;
};

/// Ordinary least squares fit of y on X (tiny ridge when rank-deficient).
Eigen::VectorXd ols_fit(const Dataset& d);

/// Newton-Raphson ascent on the log-posterior. Default start is the OLS
/// fit for a Cauchy prior and zero otherwise. A non-negative-definite
/// Hessian is shifted by (lambda_max + 1e-6) I and every step is guarded
/// by halving line search, so accepted steps never decrease the objective.
MapResult newton_map(const PosteriorTarget& t,
                     std::optional<Eigen::VectorXd> init = std::nullopt,
                     const NewtonOptions& opts = {});

/// Same ascent applied to an arbitrary twice-differentiable objective.
struct ObjectiveDerivs {
  double value;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};
using Objective = std::function<ObjectiveDerivs(const Eigen::VectorXd&)>;
MapResult maximize_newton(const Objective& f, Eigen::VectorXd init,
                          const NewtonOptions& opts = {});

}  // namespace binreg
