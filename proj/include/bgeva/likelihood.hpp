#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bgeva/data.hpp"
#include "bgeva/links.hpp"
#include "bgeva/splines.hpp"

namespace bgeva {

enum class TermKind { parametric, smooth };

struct TermSpec {
  std::string covariate;
  TermKind kind = TermKind::smooth;
  SmoothTermSpec smooth;  // used when kind == smooth

  static TermSpec linear(std::string covariate) { return {std::move(covariate), TermKind::parametric, {}}; }
  static TermSpec smooth_of(std::string covariate, int k = 20, BasisKind basis = BasisKind::thin_plate) {
    TermSpec t{covariate, TermKind::smooth, {}};
    t.smooth.covariate = std::move(covariate);
    t.smooth.k = k;
    t.smooth.kind = basis;
    return t;
  }
  // "s(x)" or "s(x,k=10,bs=cr,m=2)" for smooths, bare "x" for linear terms.
  std::string label() const;
};

// Additive predictor: intercept + listed terms.
struct DesignSpec {
  std::vector<TermSpec> terms;

  // Parses "s(x1) + x2 + s(x3, k=10)".
  static DesignSpec parse(const std::string& formula);
  std::string to_string() const;

  std::size_t find(const std::string& covariate) const;  // index or npos
  DesignSpec without(const std::string& covariate) const;
};

struct ColumnSpan {
  Eigen::Index start = 0;
  Eigen::Index size = 0;
};

struct DesignTerm {
  std::string name;
  TermKind kind = TermKind::parametric;
  ColumnSpan span;
  std::optional<BasisMap> basis;  // smooth terms
  Eigen::MatrixXd penalty;        // smooth terms: S_j
  int null_dim = 0;
};

inline const std::string kInterceptName = "(Intercept)";

// Column layout: intercept, parametric columns, then one centered spline block
// per smooth, each in declaration order.
struct ModelDesign {
  Eigen::MatrixXd b;
  std::vector<DesignTerm> terms;  // terms[0] is the intercept
  LinkKind link;

  Eigen::Index q() const { return b.cols(); }
  std::vector<std::size_t> smooth_terms() const;
  std::size_t parametric_count() const;  // excluding the intercept
  std::size_t term_index(const std::string& name) const;  // throws when absent

  // S_lambda = diag(0, lambda_1 S_1, ..., lambda_p S_p); one lambda per smooth term.
  Eigen::MatrixXd penalty_matrix(const Eigen::VectorXd& lambdas) const;
};

ModelDesign build_design(const DesignSpec& spec, const Dataset& data, const LinkKind& link);

struct DesignRows {
  Eigen::MatrixXd b;
  std::vector<bool> extrapolated;
};

// Design rows for new data using the stored bases of `terms`.
DesignRows design_rows(const std::vector<DesignTerm>& terms, const Dataset& data);

struct WorkingState {
  Eigen::VectorXd eta;
  Eigen::VectorXd pd;
  Eigen::VectorXd d;  // d loglik_i / d eta_i
  Eigen::VectorXd w;  // -d2 loglik_i / d eta_i^2, floored at kWeightFloor
  Eigen::VectorXd z;  // eta + d / w
  double loglik = 0.0;
  std::vector<bool> feasible;
  std::size_t floored = 0;
};

inline constexpr double kWeightFloor = 1e-8;

double loglik(const ModelDesign& design, const Eigen::VectorXd& delta, const Dataset& data);
double penalized_loglik(const ModelDesign& design, const Eigen::VectorXd& delta, const Eigen::VectorXd& lambdas,
                        const Dataset& data);
Eigen::VectorXd score(const ModelDesign& design, const Eigen::VectorXd& delta, const Dataset& data);
Eigen::MatrixXd hessian(const ModelDesign& design, const Eigen::VectorXd& delta, const Dataset& data);
WorkingState working_quantities(const ModelDesign& design, const Eigen::VectorXd& delta, const Dataset& data);

// Value, gradient and Hessian of the unpenalized log-likelihood in one pass.
struct LoglikEval {
  double value = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;
};
LoglikEval evaluate_loglik(const Eigen::MatrixXd& b, const LinkKind& link, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& delta, bool with_derivatives);

}  // namespace bgeva
