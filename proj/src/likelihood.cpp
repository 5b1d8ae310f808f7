#include "bgeva/likelihood.hpp"

#include <sstream>

#include "bgeva/error.hpp"
#include "bgeva/kernels.hpp"

namespace bgeva {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_top_level(const std::string& text, char sep) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad integer for " + key + ": '" + value + "'");
  }
}

[[noreturn]] void report_infeasible(const LinkKind& link, const Eigen::VectorXd& eta, std::vector<std::size_t> rows) {
  std::ostringstream msg;
  msg << rows.size() << " row(s) outside the " << link.to_string() << " support, e.g. row " << rows.front()
      << " with eta = " << eta[static_cast<Eigen::Index>(rows.front())];
  const double first = eta[static_cast<Eigen::Index>(rows.front())];
  throw DomainError(msg.str(), std::move(rows), first);
}

}  // namespace

std::string TermSpec::label() const {
  if (kind == TermKind::parametric) return covariate;
  std::ostringstream out;
  out << "s(" << covariate;
  if (smooth.k != 20) out << ",k=" << smooth.k;
  if (smooth.kind != BasisKind::thin_plate) out << ",bs=" << to_string(smooth.kind);
  if (smooth.penalty_order != 2) out << ",m=" << smooth.penalty_order;
  out << ")";
  return out.str();
}

DesignSpec DesignSpec::parse(const std::string& formula) {
  DesignSpec spec;
  if (trim(formula).empty()) return spec;
  for (const auto& part : split_top_level(formula, '+')) {
    if (part.empty()) throw ConfigError("empty term in formula '" + formula + "'");
    if (part.size() > 3 && part.rfind("s(", 0) == 0 && part.back() == ')') {
      const auto args = split_top_level(part.substr(2, part.size() - 3), ',');
      TermSpec t;
      t.kind = TermKind::smooth;
      t.covariate = args.at(0);
      if (t.covariate.empty()) throw ConfigError("smooth without a covariate in '" + part + "'");
      t.smooth.covariate = t.covariate;
      for (std::size_t a = 1; a < args.size(); ++a) {
        const auto eq = args[a].find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value in '" + part + "'");
        const auto key = trim(args[a].substr(0, eq));
        const auto value = trim(args[a].substr(eq + 1));
        if (key == "k") t.smooth.k = parse_int(key, value);
        else if (key == "m") t.smooth.penalty_order = parse_int(key, value);
        else if (key == "bs") t.smooth.kind = parse_basis_kind(value);
        else throw ConfigError("unknown smooth option '" + key + "'");
      }
      spec.terms.push_back(std::move(t));
    } else {
      if (part.find_first_of("()=, \t") != std::string::npos)
        throw ConfigError("malformed term '" + part + "' in formula");
      spec.terms.push_back(TermSpec::linear(part));
    }
  }
  for (std::size_t i = 0; i < spec.terms.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (spec.terms[i].covariate == spec.terms[j].covariate)
        throw ConfigError("covariate '" + spec.terms[i].covariate + "' appears twice in the formula");
  return spec;
}

std::string DesignSpec::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += " + ";
    out += terms[i].label();
  }
  return out;
}

std::size_t DesignSpec::find(const std::string& covariate) const {
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].covariate == covariate) return i;
  return std::string::npos;
}

DesignSpec DesignSpec::without(const std::string& covariate) const {
  DesignSpec out;
  for (const auto& t : terms)
    if (t.covariate != covariate) out.terms.push_back(t);
  return out;
}

std::vector<std::size_t> ModelDesign::smooth_terms() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].kind == TermKind::smooth) idx.push_back(i);
  return idx;
}

std::size_t ModelDesign::parametric_count() const {
  std::size_t c = 0;
  for (std::size_t i = 1; i < terms.size(); ++i) c += terms[i].kind == TermKind::parametric;
  return c;
}

std::size_t ModelDesign::term_index(const std::string& name) const {
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].name == name) return i;
  throw ConfigError("unknown model term '" + name + "'");
}

Eigen::MatrixXd ModelDesign::penalty_matrix(const Eigen::VectorXd& lambdas) const {
  const auto smooth = smooth_terms();
  if (static_cast<std::size_t>(lambdas.size()) != smooth.size())
    throw ConfigError("one smoothing parameter per smooth term is required");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(q(), q());
  for (std::size_t j = 0; j < smooth.size(); ++j) {
    if (!(lambdas[static_cast<Eigen::Index>(j)] >= 0.0)) throw ConfigError("smoothing parameters must be >= 0");
    const auto& t = terms[smooth[j]];
    s.block(t.span.start, t.span.start, t.span.size, t.span.size) = lambdas[static_cast<Eigen::Index>(j)] * t.penalty;
  }
  return s;
}

ModelDesign build_design(const DesignSpec& spec, const Dataset& data, const LinkKind& link) {
  ModelDesign design;
  design.link = link;
  std::vector<DesignTerm> parametric, smooth;
  std::vector<Eigen::MatrixXd> smooth_blocks;
  for (const auto& t : spec.terms) {
    const Eigen::VectorXd x = data.covariate(t.covariate);
    DesignTerm dt;
    dt.name = t.covariate;
    dt.kind = t.kind;
    if (t.kind == TermKind::parametric) {
      dt.span.size = 1;
      parametric.push_back(std::move(dt));
    } else {
      auto sm = t.smooth;
      sm.covariate = t.covariate;
      auto basis = build_basis(x, sm);
      dt.span.size = basis.design.cols();
      dt.penalty = std::move(basis.penalty);
      dt.null_dim = basis.null_dim;
      dt.basis = std::move(basis.map);
      smooth_blocks.push_back(std::move(basis.design));
      smooth.push_back(std::move(dt));
    }
  }
  Eigen::Index q = 1 + static_cast<Eigen::Index>(parametric.size());
  for (const auto& s : smooth) q += s.span.size;
  design.b.resize(static_cast<Eigen::Index>(data.n()), q);
  design.b.col(0).setOnes();
  DesignTerm intercept;
  intercept.name = kInterceptName;
  intercept.span = {0, 1};
  design.terms.push_back(intercept);
  Eigen::Index col = 1;
  for (auto& t : parametric) {
    t.span.start = col;
    design.b.col(col++) = data.covariate(t.name);
    design.terms.push_back(std::move(t));
  }
  for (std::size_t j = 0; j < smooth.size(); ++j) {
    smooth[j].span.start = col;
    design.b.middleCols(col, smooth[j].span.size) = smooth_blocks[j];
    col += smooth[j].span.size;
    design.terms.push_back(std::move(smooth[j]));
  }
  return design;
}

DesignRows design_rows(const std::vector<DesignTerm>& terms, const Dataset& data) {
  Eigen::Index q = 0;
  for (const auto& t : terms) q = std::max(q, t.span.start + t.span.size);
  DesignRows out;
  out.b.resize(static_cast<Eigen::Index>(data.n()), q);
  out.extrapolated.assign(data.n(), false);
  for (const auto& t : terms) {
    if (t.name == kInterceptName) {
      out.b.col(t.span.start).setOnes();
      continue;
    }
    const Eigen::VectorXd x = data.covariate(t.name);
    if (t.kind == TermKind::parametric) {
      out.b.col(t.span.start) = x;
    } else {
      out.b.middleCols(t.span.start, t.span.size) = t.basis->evaluate(x);
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (t.basis->outside_range(x[i])) out.extrapolated[static_cast<std::size_t>(i)] = true;
    }
  }
  return out;
}

LoglikEval evaluate_loglik(const Eigen::MatrixXd& b, const LinkKind& link, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& delta, bool with_derivatives) {
  if (delta.size() != b.cols()) throw ConfigError("coefficient vector length does not match the design");
  const Eigen::VectorXd eta = b * delta;
  if (auto bad = kernels::infeasible_rows(link, eta); !bad.empty()) report_infeasible(link, eta, std::move(bad));
  const auto terms = kernels::row_terms(link, y, eta);
  LoglikEval out;
  out.value = kernels::ordered_sum(terms.loglik);
  if (with_derivatives) {
    out.score = kernels::weighted_colsum(b, terms.d1);
    out.hessian = kernels::weighted_crossprod(b, terms.d2);
  }
  return out;
}

double loglik(const ModelDesign& design, const Eigen::VectorXd& delta, const Dataset& data) {
  return evaluate_loglik(design.b, design.link, data.response(), delta, false).value;
}

double penalized_loglik(const ModelDesign& design, const Eigen::VectorXd& delta, const Eigen::VectorXd& lambdas,
                        const Dataset& data) {
  const Eigen::MatrixXd s = design.penalty_matrix(lambdas);
  return loglik(design, delta, data) - 0.5 * delta.dot(s * delta);
}

Eigen::VectorXd score(const ModelDesign& design, const Eigen::VectorXd& delta, const Dataset& data) {
  return evaluate_loglik(design.b, design.link, data.response(), delta, true).score;
}

Eigen::MatrixXd hessian(const ModelDesign& design, const Eigen::VectorXd& delta, const Dataset& data) {
  return evaluate_loglik(design.b, design.link, data.response(), delta, true).hessian;
}

WorkingState working_quantities(const ModelDesign& design, const Eigen::VectorXd& delta, const Dataset& data) {
  WorkingState ws;
  ws.eta = design.b * delta;
  const auto n = ws.eta.size();
  ws.feasible.resize(static_cast<std::size_t>(n), true);
  if (auto bad = kernels::infeasible_rows(design.link, ws.eta); !bad.empty()) {
    report_infeasible(design.link, ws.eta, std::move(bad));
  }
  const auto terms = kernels::row_terms(design.link, data.response(), ws.eta);
  ws.loglik = kernels::ordered_sum(terms.loglik);
  ws.d = terms.d1;
  ws.w.resize(n);
  ws.z.resize(n);
  ws.pd.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double w = -terms.d2[i];
    if (!(w > kWeightFloor)) {
      w = kWeightFloor;
      ++ws.floored;
    }
    ws.w[i] = w;
    ws.z[i] = ws.eta[i] + ws.d[i] / w;
    ws.pd[i] = inverse_link(design.link, ws.eta[i]);
  }
  return ws;
}

}  // namespace bgeva
