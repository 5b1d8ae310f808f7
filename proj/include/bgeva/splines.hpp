#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bgeva {

enum class BasisKind { thin_plate, cubic_regression };

std::string to_string(BasisKind kind);
BasisKind parse_basis_kind(const std::string& text);

struct SmoothTermSpec {
  std::string covariate;
  BasisKind kind = BasisKind::thin_plate;
  int k = 20;             // basis dimension before the centering constraint
  int penalty_order = 2;  // derivative order of the roughness penalty
};

inline constexpr std::size_t kMaxKnots = 200;

// Data needed to rebuild the centered basis at arbitrary covariate values.
struct BasisMap {
  BasisKind kind = BasisKind::thin_plate;
  int k = 20;
  int penalty_order = 2;
  // Covariates are mapped to u = (x - shift) / scale before evaluation.
  double shift = 0.0;
  double scale = 1.0;
  double x_min = 0.0;
  double x_max = 0.0;
  std::vector<double> knots;  // in u units
  // thin-plate: knots x (K - null_dim) map from radial evaluations to columns.
  // cubic-regression: K x K map from knot values to knot second derivatives.
  Eigen::MatrixXd transform;
  Eigen::VectorXd column_means;

  int columns() const { return static_cast<int>(column_means.size()); }

  // Basis rows before centering.
  Eigen::MatrixXd raw(const Eigen::VectorXd& x) const;
  // Centered basis rows; these are the columns that enter the model design.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;

  bool outside_range(double x) const { return x < x_min || x > x_max; }
};

struct SmoothBasis {
  BasisMap map;
  Eigen::MatrixXd design;   // n x (K-1), centered
  Eigen::MatrixXd penalty;  // (K-1) x (K-1), symmetric PSD
  int null_dim = 1;         // dimension of the penalty null space after centering
};

SmoothBasis build_basis(const Eigen::VectorXd& x, const SmoothTermSpec& spec);

struct SmoothValues {
  Eigen::VectorXd values;
  std::vector<bool> extrapolated;
  bool any_extrapolated = false;
};

// f(x) = B(x) gamma using the stored transform; outside the training range the
// basis continues linearly and the rows are flagged.
SmoothValues evaluate_smooth(const BasisMap& map, const Eigen::VectorXd& gamma, const Eigen::VectorXd& x_new);

}  // namespace bgeva
