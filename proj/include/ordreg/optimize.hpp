#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

namespace ordreg {

/// Objective evaluation: returns the value and fills the gradient (and the
/// Hessian, when requested). +infinity marks an infeasible point.
using SecondOrderObjective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* gradient,
                         Eigen::MatrixXd* hessian)>;
using FirstOrderObjective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* gradient)>;

struct OptimizerOptions {
  double tolerance = 1e-6;  // on max |gradient|
  int max_iterations = 100;
  int max_halvings = 40;
  /// Called after each accepted iterate; throwing aborts the run.
  std::function<void(const Eigen::VectorXd&, double)> on_iterate;
  /// Per-coordinate lower bounds (BFGS only); the iterate is projected.
  std::optional<Eigen::VectorXd> lower_bounds;
};

struct OptimizerResult {
  Eigen::VectorXd x;
  double value = 0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int halvings = 0;
  bool converged = false;
  /// Objective value at the start and after every accepted step.
  std::vector<double> trace;
};

/// Newton's method with the analytic Hessian and backtracking (Armijo)
/// line search. Falls back to a BFGS-updated matrix while the Hessian is not
/// positive definite.
OptimizerResult newton_minimize(const SecondOrderObjective& objective, Eigen::VectorXd x0,
                                const OptimizerOptions& options);

/// BFGS with backtracking line search and optional lower bounds. Bound
/// coordinates whose gradient points outward are excluded from the
/// convergence test.
OptimizerResult bfgs_minimize(const FirstOrderObjective& objective, Eigen::VectorXd x0,
                              const OptimizerOptions& options);

/// Central-difference gradient with step 1e-5 * max(1, |x_j|).
Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double relative_step = 1e-5);

/// Central-difference Hessian built from function values.
Eigen::MatrixXd numeric_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x, double relative_step = 1e-4);

/// 2-norm condition number of a symmetric matrix (max/min |eigenvalue|).
double condition_number(const Eigen::MatrixXd& symmetric);

}  // namespace ordreg
