#include "bgeva/trust_region.hpp"

#include <cmath>
#include <limits>

#include "bgeva/error.hpp"

namespace bgeva {

namespace {

struct NewtonSystem {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd curvature;  // -(H) + mu*I, positive definite
  int shifts = 0;
};

NewtonSystem factor_curvature(const Eigen::MatrixXd& hessian, double initial_shift) {
  NewtonSystem sys;
  const Eigen::MatrixXd neg = -hessian;
  sys.llt.compute(neg);
  if (sys.llt.info() == Eigen::Success) {
    sys.curvature = neg;
    return sys;
  }
  const double scale = std::max(1.0, neg.diagonal().cwiseAbs().maxCoeff());
  double mu = initial_shift * scale;
  for (int attempt = 0; attempt < 200; ++attempt) {
    ++sys.shifts;
    Eigen::MatrixXd shifted = neg;
    shifted.diagonal().array() += mu;
    sys.llt.compute(shifted);
    if (sys.llt.info() == Eigen::Success) {
      sys.curvature = std::move(shifted);
      return sys;
    }
    mu *= 2.0;
  }
  throw NumericalError("Hessian could not be made negative definite by a Levenberg shift");
}

// Dogleg step for max g^T p - 1/2 p^T A p subject to ||p|| <= radius.
Eigen::VectorXd dogleg(const Eigen::VectorXd& g, const NewtonSystem& sys, const Eigen::VectorXd& newton,
                       double radius, bool& full_newton) {
  full_newton = false;
  if (newton.norm() <= radius) {
    full_newton = true;
    return newton;
  }
  const double gag = g.dot(sys.curvature * g);
  const double gg = g.squaredNorm();
  if (!(gag > 0.0)) return radius / std::sqrt(gg) * g;
  const Eigen::VectorXd cauchy = (gg / gag) * g;
  const double cn = cauchy.norm();
  if (cn >= radius) return (radius / cn) * cauchy;
  // ||cauchy + t (newton - cauchy)|| = radius, t in [0, 1]
  const Eigen::VectorXd diff = newton - cauchy;
  const double a = diff.squaredNorm();
  const double b = 2.0 * cauchy.dot(diff);
  const double c = cauchy.squaredNorm() - radius * radius;
  const double t = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
  return cauchy + t * diff;
}

}  // namespace

TrustRegionResult trust_region_maximize(const Objective& objective, Eigen::VectorXd start,
                                        const TrustRegionOptions& options) {
  TrustRegionResult result;
  auto current = objective(start, true);
  if (!current) throw DomainError("trust region started from an infeasible point");
  result.x = std::move(start);
  result.accepted_values.push_back(current->value);
  double radius = options.initial_radius;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double f = current->value;
    const Eigen::VectorXd& g = current->gradient;
    if (g.cwiseAbs().maxCoeff() <= options.gradient_tol * (1.0 + std::abs(f))) {
      result.converged = true;
      result.stop_reason = "gradient";
      break;
    }
    ++result.iterations;
    const NewtonSystem sys = factor_curvature(current->hessian, options.initial_shift);
    result.levenberg_shifts += sys.shifts;
    const Eigen::VectorXd newton = sys.llt.solve(g);

    bool full_newton = false;
    const Eigen::VectorXd step = dogleg(g, sys, newton, radius, full_newton);
    const double predicted = g.dot(step) - 0.5 * step.dot(sys.curvature * step);
    if (!(predicted > 1e-15 * (1.0 + std::abs(f)))) {
      result.converged = g.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + std::abs(f));
      result.stop_reason = "no predicted progress";
      break;
    }
    const Eigen::VectorXd trial_x = result.x + step;
    auto trial = objective(trial_x, false);
    double ratio = -1.0;
    if (!trial) {
      ++result.infeasible_trials;
    } else {
      ratio = (trial->value - f) / predicted;
    }
    const double step_norm = step.norm();
    if (ratio < options.ratio_low) {
      radius = options.shrink * std::min(radius, step_norm);
    } else if (ratio > options.ratio_high && !full_newton) {
      radius = std::min(options.grow * radius, options.max_radius);
    }
    if (ratio > 0.0 && trial->value >= f) {
      auto full = objective(trial_x, true);
      result.x = trial_x;
      current = std::move(full);
      ++result.accepted;
      result.accepted_values.push_back(current->value);
      const bool small = step.cwiseAbs().maxCoeff() <= options.step_tol * (1.0 + result.x.cwiseAbs().maxCoeff());
      if (full_newton && small) {
        result.converged = true;
        result.stop_reason = "step";
        break;
      }
    } else {
      ++result.rejected;
      if (radius < 1e-14 * (1.0 + result.x.norm())) {
        result.converged = g.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + std::abs(f));
        result.stop_reason = "radius collapsed";
        break;
      }
    }
  }
  if (result.stop_reason.empty()) {
    const double f = current->value;
    result.converged = current->gradient.cwiseAbs().maxCoeff() <= options.gradient_tol * (1.0 + std::abs(f));
    result.stop_reason = result.converged ? "gradient" : "iteration limit";
  }
  // Near the optimum the objective stops resolving progress long before the
  // coefficients settle when the curvature is poorly conditioned. Plain Newton
  // steps that shrink the gradient and keep the value within rounding finish
  // the job.
  if (result.converged) {
    for (int k = 0; k < options.polish_steps; ++k) {
      const double f = current->value;
      const double g_norm = current->gradient.cwiseAbs().maxCoeff();
      if (g_norm == 0.0) break;
      const Eigen::LLT<Eigen::MatrixXd> llt(-current->hessian);
      if (llt.info() != Eigen::Success) break;
      const Eigen::VectorXd trial_x = result.x + llt.solve(current->gradient);
      auto trial = objective(trial_x, true);
      if (!trial) break;
      if (trial->value < f - 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f))) break;
      if (!(trial->gradient.cwiseAbs().maxCoeff() < g_norm)) break;
      result.x = trial_x;
      current = std::move(trial);
      ++result.polished;
    }
  }
  result.at_optimum = std::move(*current);
  return result;
}

}  // namespace bgeva
