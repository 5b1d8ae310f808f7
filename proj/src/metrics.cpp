#include "bgeva/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "bgeva/error.hpp"

namespace bgeva {

namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts count_classes(const Eigen::VectorXd& y) {
  ClassCounts c;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y[i] > 0.5 ? c.pos : c.neg)++;
  return c;
}

void require_both(const ClassCounts& c, const char* what) {
  if (c.pos == 0 || c.neg == 0) throw DataError(std::string(what) + " needs both classes");
}

}  // namespace

MaeMsePlus mae_mse_plus(const Eigen::VectorXd& y, const Eigen::VectorXd& pd) {
  if (y.size() != pd.size()) throw DataError("response and probability vectors differ in length");
  double abs_sum = 0.0, sq_sum = 0.0;
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] <= 0.5) continue;
    const double e = 1.0 - pd[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    ++pos;
  }
  if (pos == 0) throw DataError("MAE+/MSE+ need at least one positive row");
  return {abs_sum / static_cast<double>(pos), sq_sum / static_cast<double>(pos)};
}

double auc(const Eigen::VectorXd& y, const Eigen::VectorXd& scores) {
  if (y.size() != scores.size()) throw DataError("response and score vectors differ in length");
  const auto counts = count_classes(y);
  require_both(counts, "AUC");
  const auto n = static_cast<std::size_t>(y.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] < scores[static_cast<Eigen::Index>(b)];
  });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[static_cast<Eigen::Index>(order[j + 1])] == scores[static_cast<Eigen::Index>(order[i])]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (y[static_cast<Eigen::Index>(order[k])] > 0.5) rank_sum += midrank;
    i = j + 1;
  }
  const double np = static_cast<double>(counts.pos), nn = static_cast<double>(counts.neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

BetaWeights severity_beta(double severity_ratio) {
  if (!(severity_ratio > 0.0)) throw ConfigError("severity ratio must be positive");
  return {2.0, 1.0 + 1.0 / severity_ratio};
}

std::vector<RocPoint> roc_points(const Eigen::VectorXd& y, const Eigen::VectorXd& scores) {
  const auto counts = count_classes(y);
  require_both(counts, "ROC");
  const auto n = static_cast<std::size_t>(y.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
  });
  std::vector<RocPoint> pts{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n;) {
    const double s = scores[static_cast<Eigen::Index>(order[i])];
    // tied scores enter together
    while (i < n && scores[static_cast<Eigen::Index>(order[i])] == s) {
      (y[static_cast<Eigen::Index>(order[i])] > 0.5 ? tp : fp)++;
      ++i;
    }
    pts.push_back({static_cast<double>(fp) / counts.neg, static_cast<double>(tp) / counts.pos});
  }
  return pts;
}

std::vector<RocPoint> roc_upper_hull(const std::vector<RocPoint>& points) {
  std::vector<RocPoint> sorted = points;
  std::sort(sorted.begin(), sorted.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr < b.fpr || (a.fpr == b.fpr && a.tpr < b.tpr);
  });
  std::vector<RocPoint> hull;
  for (const auto& p : sorted) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      // drop b unless it lies strictly above the chord a -> p
      const double cross = (b.fpr - a.fpr) * (p.tpr - a.tpr) - (b.tpr - a.tpr) * (p.fpr - a.fpr);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  return hull;
}

namespace {

// Integral over [lo, hi] of the loss of ROC point v under Beta(a, b) cost weights.
double segment_loss(const RocPoint& v, double lo, double hi, double pi0, double pi1, const BetaWeights& w) {
  if (!(hi > lo)) return 0.0;
  using boost::math::ibeta;
  const double a = w.alpha, b = w.beta;
  const double mean_c = a / (a + b);
  const double mean_1mc = b / (a + b);
  const double int_c = mean_c * (ibeta(a + 1.0, b, hi) - ibeta(a + 1.0, b, lo));
  const double int_1mc = mean_1mc * (ibeta(a, b + 1.0, hi) - ibeta(a, b + 1.0, lo));
  return pi0 * v.fpr * int_c + pi1 * (1.0 - v.tpr) * int_1mc;
}

double hull_loss(const std::vector<RocPoint>& hull, double pi0, double pi1, const BetaWeights& w) {
  // Vertex k is optimal for c between the cost thresholds of its two segments.
  const std::size_t m = hull.size();
  std::vector<double> threshold(m + 1);
  threshold[0] = 1.0;
  threshold[m] = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    const double dx = hull[k].fpr - hull[k - 1].fpr;
    const double dy = hull[k].tpr - hull[k - 1].tpr;
    // c / (1 - c) = pi1 * slope / pi0
    threshold[k] = dx <= 0.0 ? 1.0 : pi1 * dy / (pi0 * dx + pi1 * dy);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) total += segment_loss(hull[k], threshold[k + 1], threshold[k], pi0, pi1, w);
  return total;
}

}  // namespace

double h_measure(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, double severity_ratio) {
  if (y.size() != scores.size()) throw DataError("response and score vectors differ in length");
  const auto counts = count_classes(y);
  require_both(counts, "H-measure");
  const BetaWeights w = severity_beta(severity_ratio);
  const double n = static_cast<double>(y.size());
  const double pi0 = counts.neg / n, pi1 = counts.pos / n;
  const auto hull = roc_upper_hull(roc_points(y, scores));
  const double loss = hull_loss(hull, pi0, pi1, w);
  const double loss_max = hull_loss({{0.0, 0.0}, {1.0, 1.0}}, pi0, pi1, w);
  const double h = 1.0 - loss / loss_max;
  return std::clamp(h, 0.0, 1.0);
}

MetricsReport evaluate_metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& pd, double severity_ratio,
                               std::string split_label) {
  MetricsReport r;
  const auto counts = count_classes(y);
  r.n_pos = counts.pos;
  r.n_neg = counts.neg;
  const auto mm = mae_mse_plus(y, pd);
  r.mae_plus = mm.mae_plus;
  r.mse_plus = mm.mse_plus;
  r.auc = auc(y, pd);
  r.h_measure = h_measure(y, pd, severity_ratio);
  r.severity_ratio = severity_ratio;
  r.split_label = std::move(split_label);
  return r;
}

}  // namespace bgeva
