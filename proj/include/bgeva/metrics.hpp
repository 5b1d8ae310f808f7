#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bgeva {

struct MaeMsePlus {
  double mae_plus = 0.0;
  double mse_plus = 0.0;
};

// Errors on the positive (y = 1) rows only: mean of 1 - pd and (1 - pd)^2.
MaeMsePlus mae_mse_plus(const Eigen::VectorXd& y, const Eigen::VectorXd& pd);

// Mann-Whitney AUC with midranks: P(s+ > s-) + P(s+ = s-)/2.
double auc(const Eigen::VectorXd& y, const Eigen::VectorXd& scores);

// Cost-weight density parameters for a severity ratio: alpha = 2, beta = 1 + 1/SR.
struct BetaWeights {
  double alpha;
  double beta;
};
BetaWeights severity_beta(double severity_ratio);

// Points of the empirical ROC curve as (false-positive rate, true-positive
// rate), one per distinct score threshold, from (0,0) to (1,1).
struct RocPoint {
  double fpr;
  double tpr;
};
std::vector<RocPoint> roc_points(const Eigen::VectorXd& y, const Eigen::VectorXd& scores);
std::vector<RocPoint> roc_upper_hull(const std::vector<RocPoint>& points);

// H-measure: 1 - L / L_max, with the expected minimum misclassification loss
// integrated in closed form over the ROC convex hull.
double h_measure(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, double severity_ratio = 0.01);

struct MetricsReport {
  double mae_plus = 0.0;
  double mse_plus = 0.0;
  double auc = 0.0;
  double h_measure = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double severity_ratio = 0.01;
  std::string split_label;
};

MetricsReport evaluate_metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& pd, double severity_ratio = 0.01,
                               std::string split_label = {});

}  // namespace bgeva
