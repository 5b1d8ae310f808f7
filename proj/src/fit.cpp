#include "bgeva/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bgeva/error.hpp"
#include "bgeva/inference.hpp"
#include "bgeva/kernels.hpp"

namespace bgeva {

std::string to_string(TauMetric m) { return m == TauMetric::h_measure ? "h-measure" : "mae-plus"; }

TauMetric parse_tau_metric(const std::string& text) {
  if (text == "h-measure" || text == "H" || text == "h") return TauMetric::h_measure;
  if (text == "mae-plus" || text == "mae+" || text == "MAE+") return TauMetric::mae_plus;
  throw ConfigError("unknown tau selection metric '" + text + "' (h-measure or mae-plus)");
}

void FitConfig::validate() const {
  if (max_outer < 1 || max_inner < 1) throw ConfigError("iteration limits must be positive");
  if (!(tol_delta > 0.0) || !(tol_lambda > 0.0)) throw ConfigError("tolerances must be positive");
  if (!(log10_lambda_max > log10_lambda_min) || !(log10_lambda_step > 0.0))
    throw ConfigError("invalid smoothing-parameter grid");
  if (!(golden_width > 0.0)) throw ConfigError("golden-section width must be positive");
  if (!(trust_radius_init > 0.0)) throw ConfigError("initial trust radius must be positive");
  if (!(severity_ratio > 0.0)) throw ConfigError("severity ratio must be positive");
  for (double t : tau_grid)
    if (std::abs(t) < kMinAbsTau) throw ConfigError("tau grid values must satisfy |tau| >= 1e-3 (use loglog)");
}

// ---------------------------------------------------------------------------

std::size_t FittedModel::term_index(const std::string& name) const {
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].name == name) return i;
  throw ConfigError("unknown model term '" + name + "'");
}

std::vector<std::size_t> FittedModel::smooth_terms() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].kind == TermKind::smooth) idx.push_back(i);
  return idx;
}

std::size_t FittedModel::smooth_position(const std::string& name) const {
  const auto idx = smooth_terms();
  for (std::size_t j = 0; j < idx.size(); ++j)
    if (terms[idx[j]].name == name) return j;
  throw ConfigError("'" + name + "' is not a smooth term of the model");
}

Eigen::MatrixXd FittedModel::penalty_matrix() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
  const auto idx = smooth_terms();
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto& t = terms[idx[j]];
    s.block(t.span.start, t.span.start, t.span.size, t.span.size) =
        smoothing.lambdas[static_cast<Eigen::Index>(j)] * t.penalty;
  }
  return s;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd initial_delta(const ModelDesign& design, const Dataset& data) {
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(design.q());
  const double rate = std::clamp(data.positive_rate(), 1e-6, 1.0 - 1e-6);
  double alpha = link(design.link, rate);
  if (design.link.is_gev()) {
    const double edge = design.link.boundary_eta();
    alpha = design.link.tau < 0.0 ? std::min(alpha, edge) : std::max(alpha, edge);
  }
  delta[0] = alpha;
  return delta;
}

InnerFit fit_inner(const ModelDesign& design, const Dataset& data, const Eigen::VectorXd& lambdas,
                   const Eigen::VectorXd& start, const FitConfig& cfg) {
  const Eigen::MatrixXd s = design.penalty_matrix(lambdas);
  const Eigen::VectorXd& y = data.response();
  const Objective objective = [&](const Eigen::VectorXd& delta, bool derivs) -> std::optional<ObjectiveEval> {
    const Eigen::VectorXd eta = design.b * delta;
    if (!kernels::infeasible_rows(design.link, eta).empty()) return std::nullopt;
    auto ll = evaluate_loglik(design.b, design.link, y, delta, derivs);
    const Eigen::VectorXd sd = s * delta;
    ObjectiveEval out;
    out.value = ll.value - 0.5 * delta.dot(sd);
    if (!std::isfinite(out.value)) return std::nullopt;
    if (derivs) {
      out.gradient = ll.score - sd;
      out.hessian = ll.hessian - s;
    }
    return out;
  };
  {
    const Eigen::VectorXd eta0 = design.b * start;
    if (!kernels::infeasible_rows(design.link, eta0).empty())
      throw DomainError("fit_inner: starting coefficients are infeasible for the link");
  }
  TrustRegionOptions opt;
  opt.max_iterations = cfg.max_inner;
  opt.initial_radius = cfg.trust_radius_init;
  opt.step_tol = cfg.tol_delta;
  InnerFit out;
  out.trace = trust_region_maximize(objective, start, opt);
  out.delta = out.trace.x;
  out.hessian = out.trace.at_optimum.hessian + s;  // unpenalized J
  return out;
}

namespace {

bool lambdas_close(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  for (Eigen::Index j = 0; j < a.size(); ++j)
    if (std::abs(a[j] - b[j]) > tol * std::abs(b[j])) return false;
  return true;
}

}  // namespace

FittedModel fit(const DesignSpec& spec, const Dataset& data, const LinkKind& link, const FitConfig& cfg) {
  cfg.validate();
  const ModelDesign design = build_design(spec, data, link);
  data.require_fittable(static_cast<std::size_t>(design.q()));
  const auto n_smooth = static_cast<Eigen::Index>(design.smooth_terms().size());

  FittedModel model;
  model.spec = spec;
  model.link = link;
  model.n = data.n();
  model.q = static_cast<std::size_t>(design.q());
  for (auto idx : design.smooth_terms()) model.training_x[design.terms[idx].name] = data.covariate(design.terms[idx].name);
  auto& diag = model.diagnostics;

  Eigen::VectorXd delta = initial_delta(design, data);
  Eigen::VectorXd lambdas;
  const bool search = n_smooth > 0 && !cfg.fixed_lambdas;
  if (cfg.fixed_lambdas) {
    if (cfg.fixed_lambdas->size() != n_smooth) throw ConfigError("fixed lambdas must match the smooth terms");
    lambdas = *cfg.fixed_lambdas;
  } else if (search) {
    lambdas = select_lambda(working_quantities(design, delta, data), design, cfg).lambdas;
  }

  InnerFit inner;
  Eigen::VectorXd previous_delta = delta;
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    ++diag.outer_iterations;
    inner = fit_inner(design, data, lambdas, delta, cfg);
    diag.inner_iterations += inner.trace.iterations;
    diag.levenberg_shifts += inner.trace.levenberg_shifts;
    diag.rejected_steps += inner.trace.rejected;
    diag.inner_converged = inner.trace.converged;
    const double step = (inner.delta - previous_delta).cwiseAbs().maxCoeff();
    const bool delta_stable = step <= cfg.tol_delta * (1.0 + inner.delta.cwiseAbs().maxCoeff());
    previous_delta = inner.delta;
    delta = inner.delta;
    if (!search) {
      diag.outer_converged = true;
      break;
    }
    const auto ws = working_quantities(design, delta, data);
    const auto next = select_lambda(ws, design, cfg, lambdas).lambdas;
    const bool same = next == lambdas;
    const bool close = lambdas_close(next, lambdas, cfg.tol_lambda);
    if (same || (close && delta_stable)) {
      diag.outer_converged = true;
      break;
    }
    lambdas = next;
  }
  if (!diag.outer_converged) diag.notes.push_back("outer iteration limit reached");

  const ModelDesign& d = design;
  const auto ws = working_quantities(d, delta, data);
  model.smoothing = smoothing_state(d, WorkingModel(ws, d).evaluate(lambdas), lambdas);
  if (ws.floored > 0)
    diag.notes.push_back(std::to_string(ws.floored) + " rows with working weight floored at 1e-8 in the UBRE model");
  const Eigen::MatrixXd s = d.penalty_matrix(lambdas);
  const auto eval = evaluate_loglik(d.b, d.link, data.response(), delta, true);
  model.delta = delta;
  model.hessian = eval.hessian;
  model.loglik = eval.value;
  model.penalized_loglik = eval.value - 0.5 * delta.dot(s * delta);
  model.covariance = covariance(eval.hessian, s, &diag.covariance_pseudo_inverse);
  if (diag.covariance_pseudo_inverse) diag.notes.push_back("-J + S_lambda not positive definite; pseudo-inverse used");
  diag.max_penalized_gradient = (eval.score - s * delta).cwiseAbs().maxCoeff();
  const bool gradient_ok = diag.max_penalized_gradient < 1e-4 * (1.0 + std::abs(model.penalized_loglik));
  if (!gradient_ok) diag.notes.push_back("penalized gradient above tolerance at the returned estimate");
  model.converged = diag.outer_converged && gradient_ok;
  model.terms = design.terms;
  return model;
}

Prediction predict(const FittedModel& model, const Dataset& newdata) {
  const auto rows = design_rows(model.terms, newdata);
  Prediction out;
  out.eta = rows.b * model.delta;
  out.extrapolated = rows.extrapolated;
  out.clamped.assign(newdata.n(), false);
  out.pd.resize(out.eta.size());
  for (Eigen::Index i = 0; i < out.eta.size(); ++i) {
    double eta = out.eta[i];
    if (model.link.is_gev() && !model.link.feasible(eta)) {
      eta = model.link.boundary_eta();
      out.clamped[static_cast<std::size_t>(i)] = true;
    }
    out.pd[i] = inverse_link(model.link, eta);
  }
  return out;
}

namespace {

// True when candidate (score a, tau ta) beats incumbent (score b, tau tb).
bool better_tau(double a, double ta, double b, double tb, TauMetric metric) {
  const double sa = metric == TauMetric::h_measure ? a : -a;
  const double sb = metric == TauMetric::h_measure ? b : -b;
  if (sa != sb) return sa > sb;
  const double da = std::abs(ta + 0.25), db = std::abs(tb + 0.25);
  if (da != db) return da < db;
  return ta > tb;
}

}  // namespace

TauGridResult fit_tau_grid(const DesignSpec& spec, const Dataset& data, const SplitPlan& validation,
                           const FitConfig& cfg) {
  if (cfg.tau_grid.empty()) throw ConfigError("tau grid is empty");
  cfg.validate();
  const auto parts = split(data, validation);
  TauGridResult result;
  std::vector<std::optional<FittedModel>> models(cfg.tau_grid.size());
  result.table.resize(cfg.tau_grid.size());

#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < cfg.tau_grid.size(); ++k) {
    auto& row = result.table[k];
    row.tau = cfg.tau_grid[k];
    try {
      auto m = fit(spec, parts.train, LinkKind::gev(row.tau), cfg);
      const auto pred = predict(m, parts.test);
      row.metrics = evaluate_metrics(parts.test.response(), pred.pd, cfg.severity_ratio, "validation");
      row.converged = m.converged;
      row.ok = true;
      if (!m.converged) row.note = "fit did not converge";
      models[k] = std::move(m);
    } catch (const Error& e) {
      row.ok = false;
      row.note = e.what();
    }
  }

  std::optional<std::size_t> winner;
  for (std::size_t k = 0; k < result.table.size(); ++k) {
    const auto& row = result.table[k];
    if (!row.ok) continue;
    const double score = cfg.tau_metric == TauMetric::h_measure ? row.metrics.h_measure : row.metrics.mae_plus;
    if (!winner) {
      winner = k;
      continue;
    }
    const auto& inc = result.table[*winner];
    const double inc_score = cfg.tau_metric == TauMetric::h_measure ? inc.metrics.h_measure : inc.metrics.mae_plus;
    if (better_tau(score, row.tau, inc_score, inc.tau, cfg.tau_metric)) winner = k;
  }
  if (!winner) {
    std::ostringstream msg;
    msg << "every tau in the grid failed to fit";
    for (const auto& row : result.table) msg << "; tau=" << row.tau << ": " << row.note;
    throw NumericalError(msg.str());
  }
  result.best_tau = result.table[*winner].tau;
  result.best = std::move(*models[*winner]);
  return result;
}

}  // namespace bgeva
