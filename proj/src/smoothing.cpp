#include "bgeva/fit.hpp"

#include <algorithm>
#include <cmath>

#include "bgeva/error.hpp"

namespace bgeva {

WorkingModel::WorkingModel(const WorkingState& working, const ModelDesign& design)
    : design_(&design), n_(static_cast<std::size_t>(design.b.rows())) {
  if (working.w.size() != design.b.rows()) throw ConfigError("working state does not match the design");
  for (Eigen::Index i = 0; i < working.w.size(); ++i)
    if (!(working.w[i] > 0.0) || !std::isfinite(working.z[i]))
      throw NumericalError("working weights must be positive and responses finite");
  const Eigen::VectorXd sw = working.w.array().sqrt();
  const Eigen::MatrixXd wb = sw.asDiagonal() * design.b;
  const Eigen::VectorXd wz = sw.cwiseProduct(working.z);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(wb);
  const Eigen::Index q = design.b.cols();
  const Eigen::Index m = std::min<Eigen::Index>(q, wb.rows());
  r_ = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  rtr_ = r_.transpose() * r_;
  const Eigen::VectorXd qtz = qr.householderQ().adjoint() * wz;
  f_ = qtz.head(m);
  rss_floor_ = qtz.tail(qtz.size() - m).squaredNorm();
}

UbreValue WorkingModel::evaluate(const Eigen::VectorXd& lambdas) const {
  const Eigen::MatrixXd system = rtr_ + design_->penalty_matrix(lambdas);
  const Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw NumericalError("B'WB + S_lambda is not positive definite");
  UbreValue out;
  out.delta = llt.solve(r_.transpose() * f_);
  const Eigen::MatrixXd influence = llt.solve(rtr_);
  out.edf_columns = influence.diagonal();
  out.edf_total = out.edf_columns.sum();
  out.weighted_rss = rss_floor_ + (f_ - r_ * out.delta).squaredNorm();
  const double n = static_cast<double>(n_);
  out.value = out.weighted_rss / n - 1.0 + 2.0 * out.edf_total / n;
  return out;
}

UbreValue ubre(const WorkingState& working, const ModelDesign& design, const Eigen::VectorXd& lambdas) {
  return WorkingModel(working, design).evaluate(lambdas);
}

SmoothingState smoothing_state(const ModelDesign& design, const UbreValue& value, const Eigen::VectorXd& lambdas) {
  SmoothingState st;
  st.lambdas = lambdas;
  st.edf_total = value.edf_total;
  st.ubre = value.value;
  for (auto idx : design.smooth_terms()) {
    const auto& span = design.terms[idx].span;
    st.edf_per_term.push_back(value.edf_columns.segment(span.start, span.size).sum());
  }
  return st;
}

namespace {

Eigen::VectorXd to_lambdas(const Eigen::VectorXd& log10_lambda) {
  return log10_lambda.unaryExpr([](double v) { return std::pow(10.0, v); });
}

}  // namespace

SmoothingState select_lambda(const WorkingState& working, const ModelDesign& design, const FitConfig& cfg,
                             const std::optional<Eigen::VectorXd>& start, LambdaSearchLog* log) {
  const WorkingModel model(working, design);
  const auto p = static_cast<Eigen::Index>(design.smooth_terms().size());
  const double lo = cfg.log10_lambda_min, hi = cfg.log10_lambda_max;

  Eigen::VectorXd current = Eigen::VectorXd::Zero(p);
  if (start) {
    if (start->size() != p) throw ConfigError("starting lambdas do not match the smooth terms");
    for (Eigen::Index j = 0; j < p; ++j)
      current[j] = std::clamp(std::log10(std::max((*start)[j], 1e-300)), lo, hi);
  }
  auto eval = [&](const Eigen::VectorXd& log_lambda) {
    const double v = model.evaluate(to_lambdas(log_lambda)).value;
    if (log) log->evaluations.emplace_back(log_lambda, v);
    return v;
  };
  double best = eval(current);
  if (p == 0) return smoothing_state(design, model.evaluate(to_lambdas(current)), to_lambdas(current));

  std::vector<double> nodes;
  const auto steps = static_cast<int>(std::floor((hi - lo) / cfg.log10_lambda_step + 1e-9));
  for (int g = 0; g <= steps; ++g) nodes.push_back(lo + g * cfg.log10_lambda_step);
  if (nodes.back() < hi) nodes.push_back(hi);

  constexpr double kInvPhi = 0.6180339887498949;
  for (int cycle = 0; cycle < cfg.max_lambda_cycles; ++cycle) {
    const double cycle_start = best;
    for (Eigen::Index j = 0; j < p; ++j) {
      Eigen::VectorXd trial = current;
      double best_j = best;
      double arg_j = current[j];
      std::size_t best_node = 0;
      double best_node_value = INFINITY;
      for (std::size_t g = 0; g < nodes.size(); ++g) {
        trial[j] = nodes[g];
        const double v = eval(trial);
        if (v < best_node_value) {
          best_node_value = v;
          best_node = g;
        }
        if (v < best_j) {
          best_j = v;
          arg_j = nodes[g];
        }
      }
      // golden-section refinement around the best node
      double a = std::max(lo, nodes[best_node] - cfg.log10_lambda_step);
      double b = std::min(hi, nodes[best_node] + cfg.log10_lambda_step);
      double c = b - kInvPhi * (b - a);
      double d = a + kInvPhi * (b - a);
      trial[j] = c;
      double fc = eval(trial);
      trial[j] = d;
      double fd = eval(trial);
      auto consider = [&](double x, double v) {
        if (v < best_j) {
          best_j = v;
          arg_j = x;
        }
      };
      consider(c, fc);
      consider(d, fd);
      while (b - a > cfg.golden_width) {
        if (fc <= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - kInvPhi * (b - a);
          trial[j] = c;
          fc = eval(trial);
          consider(c, fc);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + kInvPhi * (b - a);
          trial[j] = d;
          fd = eval(trial);
          consider(d, fd);
        }
      }
      current[j] = arg_j;
      best = best_j;
    }
    if (cycle_start - best < cfg.lambda_cycle_tol) break;
  }
  const Eigen::VectorXd lambdas = to_lambdas(current);
  return smoothing_state(design, model.evaluate(lambdas), lambdas);
}

}  // namespace bgeva
