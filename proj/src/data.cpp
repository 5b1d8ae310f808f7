#include "bgeva/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "bgeva/error.hpp"
#include "bgeva/rng.hpp"

namespace bgeva {

Dataset::Dataset(Eigen::VectorXd response, Eigen::MatrixXd covariates, std::vector<std::string> names,
                 std::optional<std::vector<int>> year, std::size_t dropped)
    : response_(std::move(response)),
      covariates_(std::move(covariates)),
      names_(std::move(names)),
      year_(std::move(year)),
      dropped_(dropped) {
  if (covariates_.rows() != response_.size() || static_cast<std::size_t>(covariates_.cols()) != names_.size())
    throw DataError("dataset shape mismatch between response, covariates and names");
  if (year_ && year_->size() != n()) throw DataError("year column length does not match response");
  for (Eigen::Index i = 0; i < response_.size(); ++i) {
    if (response_[i] != 0.0 && response_[i] != 1.0) throw DataError("response must be 0/1");
  }
}

std::size_t Dataset::column(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("unknown covariate '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool Dataset::has_column(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>((response_.array() > 0.5).count());
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Eigen::VectorXd y(rows.size());
  Eigen::MatrixXd x(rows.size(), covariates_.cols());
  std::optional<std::vector<int>> yr;
  if (year_) yr.emplace(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(rows[k]);
    y[k] = response_[i];
    x.row(k) = covariates_.row(i);
    if (yr) (*yr)[k] = (*year_)[rows[k]];
  }
  return Dataset(std::move(y), std::move(x), names_, std::move(yr));
}

Dataset Dataset::select_columns(const std::vector<std::string>& keep) const {
  Eigen::MatrixXd x(covariates_.rows(), keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) x.col(j) = covariates_.col(column(keep[j]));
  return Dataset(response_, std::move(x), keep, year_, dropped_);
}

void Dataset::require_fittable(std::size_t parameters) const {
  const auto pos = positives();
  if (pos == 0 || pos == n()) throw DataError("response needs both classes to fit a model");
  if (n() < parameters + 2) {
    std::ostringstream msg;
    msg << "too few rows (" << n() << ") for " << parameters << " parameters";
    throw DataError(msg.str());
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// RFC 4180 record reader: quoted fields, doubled quotes, CRLF or LF endings.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      break;
    } else if (c == '\n') {
      break;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) throw DataError("non-numeric CSV cell '" + s + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Dataset ingest_csv(const std::string& path, const std::string& response_column,
                   const std::optional<std::string>& year_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  // UTF-8 byte-order mark
  if (in.peek() == 0xEF) {
    char bom[3];
    in.read(bom, 3);
  }
  std::vector<std::string> header;
  if (!read_record(in, header)) throw DataError("data file '" + path + "' is empty");
  for (auto& h : header) h = trim(h);

  std::ptrdiff_t y_col = -1, yr_col = -1;
  std::vector<std::size_t> cov_cols;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == response_column) {
      y_col = static_cast<std::ptrdiff_t>(j);
    } else if (year_column && header[j] == *year_column) {
      yr_col = static_cast<std::ptrdiff_t>(j);
    } else {
      cov_cols.push_back(j);
      names.push_back(header[j]);
    }
  }
  if (!response_column.empty() && y_col < 0)
    throw DataError("response column '" + response_column + "' not found");
  if (year_column && yr_col < 0) throw DataError("year column '" + *year_column + "' not found");

  std::vector<double> ys;
  std::vector<std::vector<double>> rows;
  std::vector<int> years;
  std::size_t dropped = 0;
  std::vector<std::string> fields;
  std::size_t line = 1;
  while (read_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "record " << line << " has " << fields.size() << " fields, header has " << header.size();
      throw DataError(msg.str());
    }
    // unlabeled data (empty response name) reads as all-zero responses
    const auto y = y_col < 0 ? std::optional<double>(0.0) : parse_number(fields[static_cast<std::size_t>(y_col)]);
    std::vector<double> row(cov_cols.size());
    bool missing = !y.has_value();
    for (std::size_t k = 0; k < cov_cols.size() && !missing; ++k) {
      const auto v = parse_number(fields[cov_cols[k]]);
      if (!v) missing = true;
      else row[k] = *v;
    }
    int year = 0;
    if (!missing && yr_col >= 0) {
      const std::string s = trim(fields[static_cast<std::size_t>(yr_col)]);
      if (s.empty()) {
        missing = true;
      } else {
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), year);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.size() != 4)
          throw DataError("year cell '" + s + "' is not a 4-digit integer");
      }
    }
    if (missing) {
      ++dropped;
      continue;
    }
    if (*y != 0.0 && *y != 1.0) {
      std::ostringstream msg;
      msg << "response value " << *y << " on record " << line << " is not 0/1";
      throw DataError(msg.str());
    }
    ys.push_back(*y);
    rows.push_back(std::move(row));
    if (yr_col >= 0) years.push_back(year);
  }
  if (ys.empty()) throw DataError("no usable rows in '" + path + "'");

  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < names.size(); ++j) x(i, j) = rows[i][j];
  std::optional<std::vector<int>> yr;
  if (yr_col >= 0) yr = std::move(years);
  return Dataset(std::move(y), std::move(x), std::move(names), std::move(yr), dropped);
}

void write_csv(const std::string& path, const Dataset& data, const std::string& response_column,
               const std::string& year_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << response_column;
  for (const auto& name : data.names()) out << ',' << name;
  if (data.year()) out << ',' << year_column;
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << (data.response()[i] > 0.5 ? '1' : '0');
    for (std::size_t j = 0; j < data.p(); ++j) out << ',' << format_double(data.covariates()(i, j));
    if (data.year()) out << ',' << (*data.year())[i];
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Sampling and screening

Dataset stratified_subsample(const Dataset& data, double target, std::uint64_t seed) {
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("target positive rate must lie in (0,1)");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.n(); ++i) (data.response()[i] > 0.5 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw DataError("stratified sampling needs both classes");
  const double native = static_cast<double>(pos.size()) / data.n();
  const double n_pos = static_cast<double>(pos.size());
  // Number of negatives giving the target rate, nearest row.
  const auto wanted = static_cast<std::size_t>(std::llround(n_pos / target - n_pos));
  if (wanted > neg.size()) {
    if (native - target > 0.5 / data.n()) {
      std::ostringstream msg;
      msg << "target rate " << target << " is below the native rate " << native
          << "; it cannot be reached by removing negatives";
      throw DataError(msg.str());
    }
    return data;
  }
  if (wanted == neg.size()) return data;
  Rng rng(seed);
  rng.shuffle(neg.begin(), neg.end());
  neg.resize(wanted);
  std::vector<std::size_t> rows = pos;
  rows.insert(rows.end(), neg.begin(), neg.end());
  std::sort(rows.begin(), rows.end());
  return data.subset(rows);
}

std::vector<double> variance_inflation(const Eigen::MatrixXd& x) {
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  std::vector<double> vif(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::VectorXd target = centered.col(j);
    const double tss = target.squaredNorm();
    if (!(tss > 0.0)) throw DataError("constant covariate in VIF screen");
    if (p == 1) {
      vif[j] = 1.0;
      continue;
    }
    Eigen::MatrixXd others(x.rows(), p - 1);
    for (Eigen::Index k = 0, c = 0; k < p; ++k)
      if (k != j) others.col(c++) = centered.col(k);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others);
    const Eigen::VectorXd beta = qr.solve(target);
    const double rss = (target - others * beta).squaredNorm();
    const double r2 = 1.0 - rss / tss;
    vif[j] = r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
  }
  return vif;
}

VifResult vif_screen(const Dataset& data, double threshold) {
  if (data.p() < 2) throw DataError("VIF screening needs at least two covariates");
  VifResult result;
  std::vector<std::size_t> kept(data.p());
  std::iota(kept.begin(), kept.end(), 0);
  while (true) {
    Eigen::MatrixXd x(data.n(), kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) x.col(k) = data.covariates().col(kept[k]);
    const auto vif = variance_inflation(x);
    // Largest VIF; exact ties go to the later column.
    std::size_t worst = 0;
    for (std::size_t k = 1; k < vif.size(); ++k)
      if (vif[k] >= vif[worst]) worst = k;
    if (vif[worst] > threshold && kept.size() > 1) {
      const auto& name = data.names()[kept[worst]];
      if (std::isinf(vif[worst])) result.warnings.push_back("perfectly collinear covariate '" + name + "' dropped");
      result.dropped.push_back({name, vif[worst]});
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(worst));
      if (kept.size() == 1) {
        result.final_vifs = {{data.names()[kept[0]], 1.0}};
        break;
      }
      continue;
    }
    for (std::size_t k = 0; k < kept.size(); ++k) result.final_vifs.push_back({data.names()[kept[k]], vif[k]});
    break;
  }
  for (auto k : kept) result.kept.push_back(data.names()[k]);
  return result;
}

// ---------------------------------------------------------------------------
// Splits

SplitPlan SplitPlan::holdout(double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("holdout fraction must lie in (0,1)");
  SplitPlan plan;
  plan.kind = Kind::holdout;
  plan.fraction = fraction;
  plan.seed = seed;
  return plan;
}

SplitPlan SplitPlan::by_time(std::set<int> train_years, std::set<int> test_years) {
  for (int y : train_years)
    if (test_years.count(y)) throw ConfigError("train and test year sets overlap");
  SplitPlan plan;
  plan.kind = Kind::time;
  plan.train_years = std::move(train_years);
  plan.test_years = std::move(test_years);
  return plan;
}

SplitIndices split_indices(const Dataset& data, const SplitPlan& plan) {
  SplitIndices out;
  if (plan.kind == SplitPlan::Kind::holdout) {
    if (!(plan.fraction > 0.0 && plan.fraction < 1.0)) throw ConfigError("holdout fraction must lie in (0,1)");
    std::vector<std::size_t> idx(data.n());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(plan.seed);
    rng.shuffle(idx.begin(), idx.end());
    const auto m = static_cast<std::size_t>(std::llround(plan.fraction * static_cast<double>(data.n())));
    out.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
    out.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end());
    std::sort(out.test.begin(), out.test.end());
    std::sort(out.train.begin(), out.train.end());
  } else {
    if (!data.year()) throw DataError("time-based split requires a year column");
    for (int y : plan.train_years)
      if (plan.test_years.count(y)) throw ConfigError("train and test year sets overlap");
    const auto& years = *data.year();
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (plan.train_years.count(years[i])) out.train.push_back(i);
      else if (plan.test_years.count(years[i])) out.test.push_back(i);
    }
  }
  if (out.test.empty()) throw DataError("split produced an empty test set");
  if (out.train.empty()) throw DataError("split produced an empty training set");
  std::size_t pos = 0;
  for (auto i : out.train) pos += data.response()[static_cast<Eigen::Index>(i)] > 0.5;
  if (pos == 0 || pos == out.train.size()) throw DataError("training part of the split is missing a class");
  return out;
}

TrainTest split(const Dataset& data, const SplitPlan& plan) {
  const auto idx = split_indices(data, plan);
  return {data.subset(idx.train), data.subset(idx.test)};
}

// ---------------------------------------------------------------------------
// Simulation

ShapeKind parse_shape(const std::string& name) {
  if (name == "sine") return ShapeKind::sine;
  if (name == "bump") return ShapeKind::bump;
  if (name == "piecewise" || name == "piecewise-linear") return ShapeKind::piecewise_linear;
  throw ConfigError("unknown shape '" + name + "' (sine, bump, piecewise)");
}

std::string to_string(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::sine:
      return "sine";
    case ShapeKind::bump:
      return "bump";
    case ShapeKind::piecewise_linear:
      return "piecewise";
  }
  return "?";
}

double shape_value(ShapeKind shape, double x) {
  switch (shape) {
    case ShapeKind::sine:
      return std::sin(3.141592653589793 * x);
    case ShapeKind::bump:
      return std::exp(-8.0 * x * x);
    case ShapeKind::piecewise_linear:
      return x < 0.0 ? -0.5 * x : 1.5 * x;
  }
  return 0.0;
}

namespace {

double mean_pd(const LinkKind& link, const Eigen::VectorXd& effects, double alpha) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < effects.size(); ++i) s += inverse_link(link, alpha + effects[i]);
  return s / static_cast<double>(effects.size());
}

double empirical_rate(const LinkKind& link, const Eigen::VectorXd& effects, const Eigen::VectorXd& u, double alpha) {
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < effects.size(); ++i) hits += u[i] < inverse_link(link, alpha + effects[i]);
  return static_cast<double>(hits) / static_cast<double>(effects.size());
}

template <class F>
double bisect(F&& rate_at, double lo, double hi, double target, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rate_at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SimulationResult simulate(const SimulationConfig& cfg) {
  if (!(cfg.target_positive_rate > 0.0 && cfg.target_positive_rate < 1.0))
    throw ConfigError("target positive rate must lie in (0,1)");
  if (cfg.n == 0) throw ConfigError("simulation needs n > 0");
  const std::size_t p = cfg.linear_effects.size() + cfg.nonlinear_effects.size() + cfg.noise_covariates;
  const auto n = static_cast<Eigen::Index>(cfg.n);

  Rng rng(cfg.seed);
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = rng.uniform();
  std::optional<std::vector<int>> years;
  if (cfg.years) {
    const auto [first, last] = *cfg.years;
    if (last < first) throw ConfigError("year range is reversed");
    years.emplace(cfg.n);
    for (auto& yv : *years) yv = first + static_cast<int>(rng.below(static_cast<std::uint64_t>(last - first + 1)));
  }

  Eigen::MatrixXd components = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(p));
  Eigen::Index col = 0;
  for (double beta : cfg.linear_effects) {
    components.col(col) = beta * x.col(col);
    ++col;
  }
  for (const auto& eff : cfg.nonlinear_effects) {
    for (Eigen::Index i = 0; i < n; ++i) components(i, col) = eff.amplitude * shape_value(eff.shape, x(i, col));
    ++col;
  }
  const Eigen::VectorXd effects = components.rowwise().sum();

  double alpha = 0.0;
  if (cfg.intercept) {
    alpha = *cfg.intercept;
  } else {
    // Feasible intercept interval for the link's support.
    double lo = -60.0, hi = 60.0;
    if (cfg.link.is_gev()) {
      const double edge = cfg.link.boundary_eta();
      if (cfg.link.tau < 0.0) hi = edge - effects.maxCoeff();
      else lo = edge - effects.minCoeff();
    }
    const double target = cfg.target_positive_rate;
    if (!(lo < hi) || mean_pd(cfg.link, effects, lo) > target || mean_pd(cfg.link, effects, hi) < target) {
      throw ConfigError("cannot calibrate the intercept: effect amplitudes are too extreme for the link domain");
    }
    alpha = bisect([&](double a) { return mean_pd(cfg.link, effects, a); }, lo, hi, target, 1e-12);
    const double achieved = empirical_rate(cfg.link, effects, u, alpha);
    if (std::abs(achieved - target) > 0.01) {
      alpha = bisect([&](double a) { return empirical_rate(cfg.link, effects, u, a); }, lo, hi, target, 1e-12);
    }
  }

  Eigen::VectorXd eta = effects.array() + alpha;
  Eigen::VectorXd pd(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pd[i] = inverse_link(cfg.link, eta[i]);
    y[i] = u[i] < pd[i] ? 1.0 : 0.0;
  }
  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);

  SimulationResult result;
  result.data = Dataset(std::move(y), std::move(x), std::move(names), std::move(years));
  result.intercept = alpha;
  result.components = std::move(components);
  result.eta = std::move(eta);
  result.pd = std::move(pd);
  return result;
}

}  // namespace bgeva
