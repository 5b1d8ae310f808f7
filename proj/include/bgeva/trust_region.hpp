#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bgeva {

struct ObjectiveEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Objective to maximize. Returns nullopt when the point is infeasible; the
// gradient and Hessian may be left empty when `derivatives` is false.
using Objective = std::function<std::optional<ObjectiveEval>(const Eigen::VectorXd& x, bool derivatives)>;

struct TrustRegionOptions {
  int max_iterations = 100;
  double initial_radius = 1.0;
  double max_radius = 1e4;
  double gradient_tol = 1e-9;  // relative: ||g||_inf <= tol * (1 + |f|)
  double step_tol = 1e-6;      // relative Newton step size
  double shrink = 0.5;
  double grow = 2.0;
  double ratio_low = 0.25;
  double ratio_high = 0.75;
  double initial_shift = 1e-8;
  int polish_steps = 2;  // final unguarded Newton steps once converged
};

struct TrustRegionResult {
  Eigen::VectorXd x;
  ObjectiveEval at_optimum;
  int iterations = 0;
  int accepted = 0;
  int rejected = 0;
  int infeasible_trials = 0;
  int levenberg_shifts = 0;
  int polished = 0;  // Newton steps taken after convergence, value equal up to rounding
  bool converged = false;
  std::string stop_reason;
  std::vector<double> accepted_values;  // objective after each accepted step, starting value first
};

// Dogleg trust-region Newton ascent. The quadratic model uses the exact
// Hessian, shifted by mu*I (mu doubling) until it is negative definite.
// Steps into infeasible points count as failed steps.
TrustRegionResult trust_region_maximize(const Objective& objective, Eigen::VectorXd start,
                                        const TrustRegionOptions& options);

}  // namespace bgeva
