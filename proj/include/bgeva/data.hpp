#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bgeva/links.hpp"

namespace bgeva {

// Binary response, continuous covariates and an optional calendar-year column.
// Immutable once built; share freely across threads.
class Dataset {
public:
  Dataset() = default;
  Dataset(Eigen::VectorXd response, Eigen::MatrixXd covariates, std::vector<std::string> names,
          std::optional<std::vector<int>> year = std::nullopt, std::size_t dropped = 0);

  std::size_t n() const { return static_cast<std::size_t>(response_.size()); }
  std::size_t p() const { return names_.size(); }

  const Eigen::VectorXd& response() const { return response_; }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::optional<std::vector<int>>& year() const { return year_; }
  std::size_t dropped_rows() const { return dropped_; }

  // Column index of a covariate; throws DataError when absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  Eigen::VectorXd covariate(const std::string& name) const { return covariates_.col(column(name)); }

  std::size_t positives() const;
  double positive_rate() const { return n() == 0 ? 0.0 : static_cast<double>(positives()) / n(); }

  Dataset subset(const std::vector<std::size_t>& rows) const;
  Dataset select_columns(const std::vector<std::string>& keep) const;

  // Both classes present and n >= p + 2; throws DataError otherwise.
  void require_fittable(std::size_t parameters) const;

private:
  Eigen::VectorXd response_;
  Eigen::MatrixXd covariates_;
  std::vector<std::string> names_;
  std::optional<std::vector<int>> year_;
  std::size_t dropped_ = 0;
};

// An empty response name reads unlabeled data with every response set to 0.
Dataset ingest_csv(const std::string& path, const std::string& response_column,
                   const std::optional<std::string>& year_column = std::nullopt);

void write_csv(const std::string& path, const Dataset& data, const std::string& response_column = "y",
               const std::string& year_column = "year");

// Keeps every positive row and thins negatives to reach the target rate.
Dataset stratified_subsample(const Dataset& data, double target_positive_rate, std::uint64_t seed);

struct VifEntry {
  std::string name;
  double vif;
};

struct VifResult {
  std::vector<std::string> kept;
  std::vector<VifEntry> dropped;  // in drop order
  std::vector<VifEntry> final_vifs;
  std::vector<std::string> warnings;
};

// Variance inflation factor of every column, regressing each on the others.
std::vector<double> variance_inflation(const Eigen::MatrixXd& x);

VifResult vif_screen(const Dataset& data, double threshold = 5.0);

struct SplitPlan {
  enum class Kind { holdout, time };
  Kind kind = Kind::holdout;
  double fraction = 0.1;
  std::set<int> train_years;
  std::set<int> test_years;
  std::uint64_t seed = 1;

  static SplitPlan holdout(double fraction, std::uint64_t seed);
  static SplitPlan by_time(std::set<int> train_years, std::set<int> test_years);
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

SplitIndices split_indices(const Dataset& data, const SplitPlan& plan);

struct TrainTest {
  Dataset train;
  Dataset test;
};

TrainTest split(const Dataset& data, const SplitPlan& plan);

enum class ShapeKind { sine, bump, piecewise_linear };

ShapeKind parse_shape(const std::string& name);
std::string to_string(ShapeKind shape);
double shape_value(ShapeKind shape, double x);

struct NonlinearEffect {
  ShapeKind shape = ShapeKind::sine;
  double amplitude = 1.0;
};

struct SimulationConfig {
  std::size_t n = 1000;
  LinkKind link = LinkKind::logit();
  std::optional<double> intercept;  // calibrated when absent
  std::vector<double> linear_effects;
  std::vector<NonlinearEffect> nonlinear_effects;
  std::size_t noise_covariates = 0;
  double target_positive_rate = 0.05;
  std::optional<std::pair<int, int>> years;  // uniformly assigned calendar years
  std::uint64_t seed = 1;
};

struct SimulationResult {
  Dataset data;
  double intercept = 0.0;
  // One column per covariate: its true contribution to eta (noise columns are zero).
  Eigen::MatrixXd components;
  Eigen::VectorXd eta;
  Eigen::VectorXd pd;
};

// Covariates x1..xp are U(-1,1): linear effects first, then nonlinear ones,
// then noise. Column names are "x1", "x2", ...
SimulationResult simulate(const SimulationConfig& cfg);

}  // namespace bgeva
