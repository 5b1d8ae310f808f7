#include "bgeva/inference.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "bgeva/error.hpp"

namespace bgeva {

Eigen::MatrixXd covariance(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& s_lambda, bool* pseudo) {
  const Eigen::MatrixXd precision = -hessian + s_lambda;
  const Eigen::Index q = precision.rows();
  if (pseudo) *pseudo = false;
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() == Eigen::Success) {
    Eigen::MatrixXd v = llt.solve(Eigen::MatrixXd::Identity(q, q));
    return 0.5 * (v + v.transpose());
  }
  if (pseudo) *pseudo = true;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (precision + precision.transpose()));
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double tol = 1e-10 * ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(q);
  // only the positive part: a covariance must stay PSD
  for (Eigen::Index i = 0; i < q; ++i)
    if (ev[i] > tol) inv[i] = 1.0 / ev[i];
  const Eigen::MatrixXd& u = eig.eigenvectors();
  return u * inv.asDiagonal() * u.transpose();
}

double normal_multiplier(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0,1)");
  return boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
}

CiBand smooth_ci_at(const FittedModel& model, const std::string& term, const Eigen::VectorXd& x, double level) {
  const auto& t = model.terms[model.term_index(term)];
  if (t.kind != TermKind::smooth) throw ConfigError("'" + term + "' is not a smooth term");
  const double z = normal_multiplier(level);
  const Eigen::MatrixXd b = t.basis->evaluate(x);
  const Eigen::VectorXd gamma = model.delta.segment(t.span.start, t.span.size);
  const Eigen::MatrixXd vj = model.covariance.block(t.span.start, t.span.start, t.span.size, t.span.size);
  CiBand band;
  band.term = term;
  band.level = level;
  band.x = x;
  band.fit = b * gamma;
  const Eigen::MatrixXd bv = b * vj;
  band.se = bv.cwiseProduct(b).rowwise().sum().cwiseMax(0.0).cwiseSqrt();
  band.lower = band.fit - z * band.se;
  band.upper = band.fit + z * band.se;
  return band;
}

CiBand smooth_ci(const FittedModel& model, const std::string& term, int grid_size, double level) {
  const auto& t = model.terms[model.term_index(term)];
  if (t.kind != TermKind::smooth) throw ConfigError("'" + term + "' is not a smooth term");
  if (grid_size < 2) throw ConfigError("grid size must be at least 2");
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(grid_size, t.basis->x_min, t.basis->x_max);
  return smooth_ci_at(model, term, x, level);
}

int round_edf(double edf, bool* promoted) {
  if (promoted) *promoted = false;
  const double fl = std::floor(edf);
  int r = static_cast<int>(edf < fl + 0.05 ? fl : fl + 1.0);
  if (r < 1) {
    r = 1;
    if (promoted) *promoted = true;
  }
  return r;
}

SmoothSummary smooth_pvalue(const FittedModel& model, const std::string& term) {
  const auto& t = model.terms[model.term_index(term)];
  if (t.kind != TermKind::smooth) throw ConfigError("'" + term + "' is not a smooth term");
  const auto pos = model.smooth_position(term);
  SmoothSummary out;
  out.term = term;
  out.edf = model.smoothing.edf_per_term.at(pos);
  out.rank = round_edf(out.edf);

  const auto it = model.training_x.find(term);
  if (it == model.training_x.end()) throw ConfigError("training covariate values missing for '" + term + "'");
  const Eigen::MatrixXd b = t.basis->evaluate(it->second);
  const Eigen::VectorXd gamma = model.delta.segment(t.span.start, t.span.size);
  const Eigen::MatrixXd vj = model.covariance.block(t.span.start, t.span.start, t.span.size, t.span.size);

  // With B = QR, f = Q R gamma and Cov(f) = Q (R V R^T) Q^T share the nonzero spectrum.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  const Eigen::Index k = b.cols();
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::VectorXd rf = r * gamma;
  const Eigen::MatrixXd vf = r * vj * r.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (vf + vf.transpose()));
  const Eigen::VectorXd ev = eig.eigenvalues().reverse();
  const Eigen::MatrixXd u = eig.eigenvectors().rowwise().reverse();
  const double top = ev.size() ? ev[0] : 0.0;
  int positive = 0;
  if (top > 0.0)
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev[i] > 1e-10 * top) ++positive;
  if (positive == 0) {
    out.degenerate = true;
    out.chi_sq = 0.0;
    out.p_value = 1.0;
    return out;
  }
  if (out.rank > positive) {
    out.rank = positive;
    out.rank_reduced = true;
  }
  const Eigen::VectorXd proj = u.leftCols(out.rank).transpose() * rf;
  double stat = 0.0;
  for (int i = 0; i < out.rank; ++i) stat += proj[i] * proj[i] / ev[i];
  out.chi_sq = std::max(stat, 0.0);
  out.p_value = out.chi_sq <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(boost::math::chi_squared(out.rank), out.chi_sq));
  return out;
}

WaldResult wald_test(const FittedModel& model, const std::string& term) {
  const auto& t = model.terms[model.term_index(term)];
  if (t.kind != TermKind::parametric) throw ConfigError("'" + term + "' is not a parametric term");
  const Eigen::Index c = t.span.start;
  WaldResult out;
  out.term = term;
  out.estimate = model.delta[c];
  const double var = model.covariance(c, c);
  out.se = var > 0.0 ? std::sqrt(var) : 0.0;
  if (!(out.se > 0.0)) {
    out.degenerate = true;
    out.z = 0.0;
    out.p_value = out.estimate == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.z = out.estimate / out.se;
  out.p_value = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

SummaryTable summarize(const FittedModel& model) {
  SummaryTable table;
  for (const auto& t : model.terms) {
    if (t.kind == TermKind::parametric) table.parametric.push_back(wald_test(model, t.name));
    else table.smooth.push_back(smooth_pvalue(model, t.name));
  }
  return table;
}

Demotion demote_linear_smooths(const FittedModel& model, const Dataset& data, const FitConfig& cfg, double threshold) {
  Demotion out;
  out.spec = model.spec;
  const auto idx = model.smooth_terms();
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (model.smoothing.edf_per_term[j] > threshold) continue;
    const auto& name = model.terms[idx[j]].name;
    const auto pos = out.spec.find(name);
    out.spec.terms[pos] = TermSpec::linear(name);
    out.demoted.push_back(name);
  }
  if (out.demoted.empty()) {
    out.model = model;
    return out;
  }
  FitConfig refit_cfg = cfg;
  if (cfg.fixed_lambdas) {
    // keep the fixed values of the smooths that remain
    Eigen::VectorXd kept(static_cast<Eigen::Index>(idx.size() - out.demoted.size()));
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < idx.size(); ++j)
      if (model.smoothing.edf_per_term[j] > threshold) kept[c++] = (*cfg.fixed_lambdas)[static_cast<Eigen::Index>(j)];
    refit_cfg.fixed_lambdas = kept;
  }
  out.model = fit(out.spec, data, model.link, refit_cfg);
  return out;
}

}  // namespace bgeva
