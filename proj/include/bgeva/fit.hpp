#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bgeva/data.hpp"
#include "bgeva/likelihood.hpp"
#include "bgeva/metrics.hpp"
#include "bgeva/trust_region.hpp"

namespace bgeva {

enum class TauMetric { h_measure, mae_plus };

std::string to_string(TauMetric m);
TauMetric parse_tau_metric(const std::string& text);

struct FitConfig {
  int max_outer = 50;
  int max_inner = 100;
  double tol_delta = 1e-6;
  double tol_lambda = 1e-5;
  double log10_lambda_min = -6.0;
  double log10_lambda_max = 6.0;
  double log10_lambda_step = 0.5;
  double golden_width = 1e-2;  // final log10 bracket width
  int max_lambda_cycles = 10;
  double lambda_cycle_tol = 1e-7;
  double trust_radius_init = 1.0;
  std::vector<double> tau_grid{-1.0, -0.75, -0.5, -0.25};
  TauMetric tau_metric = TauMetric::h_measure;
  double severity_ratio = 0.01;
  std::uint64_t seed = 1;
  // When set, smoothing parameters are held at these values (one per smooth).
  std::optional<Eigen::VectorXd> fixed_lambdas;

  void validate() const;
};

struct SmoothingState {
  Eigen::VectorXd lambdas;
  double edf_total = 0.0;
  std::vector<double> edf_per_term;  // one per smooth term
  double ubre = 0.0;
};

// ---------------------------------------------------------------------------
// Working linear model used for smoothing-parameter selection.

struct UbreValue {
  double value = 0.0;
  double edf_total = 0.0;
  Eigen::VectorXd delta;
  Eigen::VectorXd edf_columns;  // diagonal of (B'WB + S)^{-1} B'WB
  double weighted_rss = 0.0;
};

// Caches a QR factorization of sqrt(W) B so that each lambda evaluation costs
// O(q^3) independent of n.
class WorkingModel {
public:
  WorkingModel(const WorkingState& working, const ModelDesign& design);

  UbreValue evaluate(const Eigen::VectorXd& lambdas) const;
  std::size_t n() const { return n_; }

private:
  const ModelDesign* design_;
  std::size_t n_;
  Eigen::MatrixXd r_;     // q x q upper triangular
  Eigen::MatrixXd rtr_;   // R^T R = B^T W B
  Eigen::VectorXd f_;     // leading q entries of Q^T sqrt(W) z
  double rss_floor_ = 0.0;  // squared norm of the trailing entries
};

UbreValue ubre(const WorkingState& working, const ModelDesign& design, const Eigen::VectorXd& lambdas);

struct LambdaSearchLog {
  // every (log10 lambda vector, UBRE) evaluated during the search
  std::vector<std::pair<Eigen::VectorXd, double>> evaluations;
};

SmoothingState select_lambda(const WorkingState& working, const ModelDesign& design, const FitConfig& cfg,
                             const std::optional<Eigen::VectorXd>& start = std::nullopt,
                             LambdaSearchLog* log = nullptr);

SmoothingState smoothing_state(const ModelDesign& design, const UbreValue& value, const Eigen::VectorXd& lambdas);

// ---------------------------------------------------------------------------

struct InnerFit {
  Eigen::VectorXd delta;
  Eigen::MatrixXd hessian;  // unpenalized J at the optimum
  TrustRegionResult trace;
};

InnerFit fit_inner(const ModelDesign& design, const Dataset& data, const Eigen::VectorXd& lambdas,
                   const Eigen::VectorXd& start, const FitConfig& cfg);

// Coefficients of the intercept-only feasible starting point.
Eigen::VectorXd initial_delta(const ModelDesign& design, const Dataset& data);

struct FitDiagnostics {
  int outer_iterations = 0;
  int inner_iterations = 0;
  int levenberg_shifts = 0;
  int rejected_steps = 0;
  bool inner_converged = false;
  bool outer_converged = false;
  double max_penalized_gradient = 0.0;
  bool covariance_pseudo_inverse = false;
  std::vector<std::string> notes;
};

struct FittedModel {
  DesignSpec spec;
  std::vector<DesignTerm> terms;  // layout, bases and penalties
  LinkKind link;
  Eigen::VectorXd delta;
  Eigen::MatrixXd covariance;  // V_delta
  Eigen::MatrixXd hessian;     // J at the optimum
  SmoothingState smoothing;
  bool converged = false;
  FitDiagnostics diagnostics;
  double loglik = 0.0;
  double penalized_loglik = 0.0;
  std::size_t n = 0;
  std::size_t q = 0;
  // training covariate values of each smooth term (tests and rug plots)
  std::map<std::string, Eigen::VectorXd> training_x;

  std::size_t term_index(const std::string& name) const;
  std::vector<std::size_t> smooth_terms() const;
  // smoothing-parameter position of a smooth term
  std::size_t smooth_position(const std::string& name) const;
  Eigen::MatrixXd penalty_matrix() const;
};

FittedModel fit(const DesignSpec& spec, const Dataset& data, const LinkKind& link, const FitConfig& cfg);

struct Prediction {
  Eigen::VectorXd pd;
  Eigen::VectorXd eta;
  std::vector<bool> extrapolated;
  std::vector<bool> clamped;  // gev rows pulled back inside the support
};

Prediction predict(const FittedModel& model, const Dataset& newdata);

struct TauGridRow {
  double tau = 0.0;
  bool ok = false;
  std::string note;
  MetricsReport metrics;
  bool converged = false;
};

struct TauGridResult {
  FittedModel best;
  double best_tau = 0.0;
  std::vector<TauGridRow> table;
};

// Winner by the configured metric; exact ties prefer tau nearest -0.25, then the larger tau.
TauGridResult fit_tau_grid(const DesignSpec& spec, const Dataset& data, const SplitPlan& validation,
                           const FitConfig& cfg);

}  // namespace bgeva
