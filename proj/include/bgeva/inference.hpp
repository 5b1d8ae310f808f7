#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bgeva/fit.hpp"

namespace bgeva {

// V_delta = (-J + S_lambda)^{-1}. When -J + S_lambda is not positive definite
// the Moore-Penrose inverse is returned and `pseudo` is set.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& s_lambda, bool* pseudo = nullptr);

// Two-sided standard normal multiplier for a confidence level (0.95 -> 1.959964).
double normal_multiplier(double level);

struct CiBand {
  std::string term;
  Eigen::VectorXd x;
  Eigen::VectorXd fit;
  Eigen::VectorXd se;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double level = 0.95;
};

// Point-wise interval for a centered smooth on an even grid over its training range.
CiBand smooth_ci(const FittedModel& model, const std::string& term, int grid_size = 200, double level = 0.95);
CiBand smooth_ci_at(const FittedModel& model, const std::string& term, const Eigen::VectorXd& x, double level = 0.95);

// floor(edf) when edf is within 0.05 of it, otherwise floor(edf) + 1; never below 1.
int round_edf(double edf, bool* promoted = nullptr);

struct SmoothSummary {
  std::string term;
  double edf = 0.0;
  int rank = 1;
  double chi_sq = 0.0;
  double p_value = 1.0;
  bool rank_reduced = false;  // fewer positive eigenvalues than the rounded edf
  bool degenerate = false;    // no positive eigenvalue at all
};

// Chi-square test of f_j = 0 using a rank-r pseudo-inverse of Cov(f_j).
SmoothSummary smooth_pvalue(const FittedModel& model, const std::string& term);

struct WaldResult {
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  bool degenerate = false;
};

WaldResult wald_test(const FittedModel& model, const std::string& term);

struct SummaryTable {
  std::vector<WaldResult> parametric;  // intercept first
  std::vector<SmoothSummary> smooth;
};

SummaryTable summarize(const FittedModel& model);

inline constexpr double kDemotionEdf = 1.01;

struct Demotion {
  FittedModel model;
  DesignSpec spec;
  std::vector<std::string> demoted;
};

// Refits with every smooth whose edf <= threshold turned into a linear term.
Demotion demote_linear_smooths(const FittedModel& model, const Dataset& data, const FitConfig& cfg,
                               double threshold = kDemotionEdf);

}  // namespace bgeva
