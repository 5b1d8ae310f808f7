#include "bgeva/splines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bgeva/error.hpp"

namespace bgeva {

std::string to_string(BasisKind kind) { return kind == BasisKind::thin_plate ? "tp" : "cr"; }

BasisKind parse_basis_kind(const std::string& text) {
  if (text == "tp" || text == "thin-plate") return BasisKind::thin_plate;
  if (text == "cr" || text == "cubic-regression") return BasisKind::cubic_regression;
  throw ConfigError("unknown basis kind '" + text + "' (tp or cr)");
}

namespace {

// Radial function of the 1-D thin-plate spline for penalty order m:
// m = 2 gives |r|^3 / 12, m = 1 gives -|r| / 2.
double radial(int order, double r) {
  r = std::abs(r);
  return order == 2 ? r * r * r / 12.0 : -0.5 * r;
}

std::vector<double> pick_knots(const std::vector<double>& unique, std::size_t count) {
  if (unique.size() <= count) return unique;
  std::vector<double> knots(count);
  const double step = static_cast<double>(unique.size() - 1) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    knots[i] = unique[static_cast<std::size_t>(std::llround(static_cast<double>(i) * step))];
  return knots;
}

Eigen::MatrixXd raw_thin_plate(const BasisMap& map, const Eigen::VectorXd& u) {
  const auto m = static_cast<Eigen::Index>(map.knots.size());
  const Eigen::Index wiggly = map.transform.cols();
  const bool linear = map.penalty_order == 2;
  Eigen::MatrixXd out(u.size(), wiggly + (linear ? 1 : 0));
  Eigen::RowVectorXd e(m);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) e[j] = radial(map.penalty_order, u[i] - map.knots[static_cast<std::size_t>(j)]);
    out.row(i).head(wiggly).noalias() = e * map.transform;
    if (linear) out(i, wiggly) = u[i];
  }
  return out;
}

// Natural cubic spline cardinal basis with the first column removed.
Eigen::MatrixXd raw_cubic(const BasisMap& map, const Eigen::VectorXd& u) {
  const auto& kn = map.knots;
  const auto k = static_cast<Eigen::Index>(kn.size());
  const Eigen::MatrixXd& f = map.transform;  // second derivatives per unit knot value
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(u.size(), k);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double x = u[i];
    if (x < kn.front()) {
      const double h = kn[1] - kn[0];
      // f(x) = f(x1) + (x - x1) f'(x1)
      Eigen::RowVectorXd slope = -h / 3.0 * f.row(0) - h / 6.0 * f.row(1);
      slope[0] -= 1.0 / h;
      slope[1] += 1.0 / h;
      full.row(i) = (x - kn.front()) * slope;
      full(i, 0) += 1.0;
      continue;
    }
    if (x > kn.back()) {
      const double h = kn[k - 1] - kn[k - 2];
      Eigen::RowVectorXd slope = h / 6.0 * f.row(k - 2) + h / 3.0 * f.row(k - 1);
      slope[k - 2] -= 1.0 / h;
      slope[k - 1] += 1.0 / h;
      full.row(i) = (x - kn.back()) * slope;
      full(i, k - 1) += 1.0;
      continue;
    }
    auto it = std::upper_bound(kn.begin(), kn.end(), x);
    auto j = static_cast<Eigen::Index>(it - kn.begin()) - 1;
    j = std::clamp<Eigen::Index>(j, 0, k - 2);
    const double h = kn[j + 1] - kn[j];
    const double am = (kn[j + 1] - x) / h;
    const double ap = (x - kn[j]) / h;
    const double dm = kn[j + 1] - x;
    const double dp = x - kn[j];
    const double cm = (dm * dm * dm / h - h * dm) / 6.0;
    const double cp = (dp * dp * dp / h - h * dp) / 6.0;
    full.row(i) = cm * f.row(j) + cp * f.row(j + 1);
    full(i, j) += am;
    full(i, j + 1) += ap;
  }
  return full.rightCols(k - 1);
}

// Scale the penalty to the size of the design so that one lambda grid suits
// every term: ||S||_1 becomes ||B||_inf^2.
void normalise_penalty(Eigen::MatrixXd& s, const Eigen::MatrixXd& design) {
  const double design_norm = design.cwiseAbs().rowwise().sum().maxCoeff();
  const double s_norm = s.cwiseAbs().colwise().sum().maxCoeff();
  if (s_norm > 0.0) s *= design_norm * design_norm / s_norm;
  s = 0.5 * (s + s.transpose()).eval();
}

}  // namespace

Eigen::MatrixXd BasisMap::raw(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd u = (x.array() - shift) / scale;
  return kind == BasisKind::thin_plate ? raw_thin_plate(*this, u) : raw_cubic(*this, u);
}

Eigen::MatrixXd BasisMap::evaluate(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd b = raw(x);
  b.rowwise() -= column_means.transpose();
  return b;
}

SmoothBasis build_basis(const Eigen::VectorXd& x, const SmoothTermSpec& spec) {
  if (spec.penalty_order != 1 && spec.penalty_order != 2) throw ConfigError("penalty order must be 1 or 2");
  if (spec.kind == BasisKind::cubic_regression && spec.penalty_order != 2)
    throw ConfigError("cubic regression splines support only the second-order penalty");
  if (spec.k < 4) throw ConfigError("basis dimension must be at least 4");

  std::vector<double> unique(x.data(), x.data() + x.size());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (unique.size() < 2) throw DataError("smooth of '" + spec.covariate + "': covariate is constant");
  if (unique.size() < static_cast<std::size_t>(spec.k))
    throw DataError("smooth of '" + spec.covariate + "': fewer distinct values than the basis dimension");

  SmoothBasis out;
  BasisMap& map = out.map;
  map.kind = spec.kind;
  map.k = spec.k;
  map.penalty_order = spec.penalty_order;
  map.x_min = unique.front();
  map.x_max = unique.back();
  map.shift = unique.front();
  map.scale = unique.back() - unique.front();
  for (auto& v : unique) v = (v - map.shift) / map.scale;
  // endpoints exactly 0 and 1 in u units
  unique.front() = 0.0;
  unique.back() = 1.0;

  const auto k = static_cast<Eigen::Index>(spec.k);
  Eigen::MatrixXd penalty;

  if (spec.kind == BasisKind::thin_plate) {
    map.knots = pick_knots(unique, kMaxKnots);
    const auto m = static_cast<Eigen::Index>(map.knots.size());
    const Eigen::Index null_space = spec.penalty_order;  // {1} or {1, x}
    Eigen::MatrixXd e(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        e(i, j) = radial(spec.penalty_order, map.knots[static_cast<std::size_t>(i)] - map.knots[static_cast<std::size_t>(j)]);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(e);
    if (eig.info() != Eigen::Success) throw NumericalError("thin-plate eigendecomposition failed");
    // Leading K eigenpairs by magnitude; stable order so builds are reproducible.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(ev[a]) > std::abs(ev[b]); });
    Eigen::MatrixXd uk(m, k);
    Eigen::VectorXd dk(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      Eigen::VectorXd col = eig.eigenvectors().col(order[static_cast<std::size_t>(c)]);
      // fix the sign so the largest-magnitude entry is positive
      Eigen::Index arg;
      col.cwiseAbs().maxCoeff(&arg);
      if (col[arg] < 0.0) col = -col;
      uk.col(c) = col;
      dk[c] = ev[order[static_cast<std::size_t>(c)]];
    }
    Eigen::MatrixXd t(m, null_space);
    t.col(0).setOnes();
    if (null_space == 2)
      for (Eigen::Index i = 0; i < m; ++i) t(i, 1) = map.knots[static_cast<std::size_t>(i)];
    // Null space of (U_k^T T)^T: the trailing columns of a full QR.
    const Eigen::MatrixXd c = uk.transpose() * t;
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
    const Eigen::MatrixXd z = q.rightCols(k - null_space);
    map.transform = uk * z;
    const Eigen::MatrixXd wiggly_penalty = z.transpose() * dk.asDiagonal() * z;
    const Eigen::Index cols = k - 1;
    penalty = Eigen::MatrixXd::Zero(cols, cols);
    penalty.topLeftCorner(k - null_space, k - null_space) = wiggly_penalty;
    out.null_dim = static_cast<int>(null_space) - 1;
  } else {
    map.knots = pick_knots(unique, static_cast<std::size_t>(spec.k));
    std::vector<double> h(static_cast<std::size_t>(k - 1));
    for (Eigen::Index j = 0; j + 1 < k; ++j)
      h[static_cast<std::size_t>(j)] = map.knots[static_cast<std::size_t>(j + 1)] - map.knots[static_cast<std::size_t>(j)];
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k - 2, k);
    Eigen::MatrixXd bm = Eigen::MatrixXd::Zero(k - 2, k - 2);
    for (Eigen::Index i = 0; i < k - 2; ++i) {
      const double h0 = h[static_cast<std::size_t>(i)], h1 = h[static_cast<std::size_t>(i + 1)];
      d(i, i) = 1.0 / h0;
      d(i, i + 1) = -1.0 / h0 - 1.0 / h1;
      d(i, i + 2) = 1.0 / h1;
      bm(i, i) = (h0 + h1) / 3.0;
      if (i + 1 < k - 2) {
        bm(i, i + 1) = h1 / 6.0;
        bm(i + 1, i) = h1 / 6.0;
      }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(bm);
    const Eigen::MatrixXd binv_d = llt.solve(d);
    map.transform = Eigen::MatrixXd::Zero(k, k);
    map.transform.middleRows(1, k - 2) = binv_d;
    const Eigen::MatrixXd full_penalty = d.transpose() * binv_d;
    penalty = full_penalty.bottomRightCorner(k - 1, k - 1);
    out.null_dim = 1;
  }

  map.column_means = Eigen::VectorXd::Zero(k - 1);
  const Eigen::MatrixXd raw = map.raw(x);
  map.column_means = raw.colwise().mean().transpose();
  out.design = raw.rowwise() - map.column_means.transpose();
  normalise_penalty(penalty, out.design);
  out.penalty = std::move(penalty);
  return out;
}

SmoothValues evaluate_smooth(const BasisMap& map, const Eigen::VectorXd& gamma, const Eigen::VectorXd& x_new) {
  if (gamma.size() != map.columns()) throw ConfigError("coefficient length does not match the basis");
  SmoothValues out;
  out.values = map.evaluate(x_new) * gamma;
  out.extrapolated.resize(static_cast<std::size_t>(x_new.size()));
  for (Eigen::Index i = 0; i < x_new.size(); ++i) {
    const bool flag = map.outside_range(x_new[i]);
    out.extrapolated[static_cast<std::size_t>(i)] = flag;
    out.any_extrapolated = out.any_extrapolated || flag;
  }
  return out;
}

}  // namespace bgeva
