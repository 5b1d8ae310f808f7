#include <doctest.h>

#include <cmath>

#include "bgeva/data.hpp"
#include "bgeva/error.hpp"
#include "bgeva/rng.hpp"
#include "bgeva/splines.hpp"

using namespace bgeva;

namespace {

Eigen::VectorXd equispaced(int n, double lo = 0.0, double hi = 1.0) {
  return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& s) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues();
}

int zero_eigenvalues(const Eigen::MatrixXd& s) {
  const auto ev = eigenvalues(s);
  const double tol = 1e-10 * ev.cwiseAbs().maxCoeff();
  int zeros = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) zeros += std::abs(ev[i]) <= tol;
  return zeros;
}

// least-squares coefficients of f on the basis columns
Eigen::VectorXd project(const Eigen::MatrixXd& b, const Eigen::VectorXd& f) {
  return b.colPivHouseholderQr().solve(f);
}

}  // namespace

TEST_SUITE("splines") {

TEST_CASE("thin-plate penalty on 100 equispaced points has one null direction") {
  const auto basis = build_basis(equispaced(100), {"x", BasisKind::thin_plate, 10, 2});
  CHECK(basis.design.cols() == 9);
  CHECK(basis.penalty.rows() == 9);
  CHECK(zero_eigenvalues(basis.penalty) == 1);
  CHECK(basis.null_dim == 1);
}

TEST_CASE("structural invariants for both bases") {
  Rng rng(2);
  Eigen::VectorXd x(400);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal() * 3 + 10;
  for (auto kind : {BasisKind::thin_plate, BasisKind::cubic_regression}) {
    for (int k : {5, 10, 20}) {
      CAPTURE(to_string(kind));
      CAPTURE(k);
      const auto basis = build_basis(x, {"x", kind, k, 2});
      CHECK(basis.design.cols() == k - 1);
      CHECK(basis.design.colwise().sum().cwiseAbs().maxCoeff() < 1e-8);
      CHECK((basis.penalty - basis.penalty.transpose()).cwiseAbs().maxCoeff() == 0.0);
      const auto ev = eigenvalues(basis.penalty);
      CHECK(ev.minCoeff() >= -1e-10 * ev.cwiseAbs().maxCoeff());
      CHECK(zero_eigenvalues(basis.penalty) == 1);  // rank K - 2
    }
  }
}

TEST_CASE("first-order thin-plate penalty has no null space after centering") {
  const auto basis = build_basis(equispaced(200), {"x", BasisKind::thin_plate, 12, 1});
  CHECK(basis.design.cols() == 11);
  CHECK(zero_eigenvalues(basis.penalty) == 0);
  CHECK(basis.null_dim == 0);
}

TEST_CASE("linear functions lie in the penalty null space") {
  Rng rng(3);
  Eigen::VectorXd x(300);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-2.0, 5.0);
  for (auto kind : {BasisKind::thin_plate, BasisKind::cubic_regression}) {
    const auto basis = build_basis(x, {"x", kind, 15, 2});
    Eigen::VectorXd f = 2.5 * x;
    f.array() -= f.mean();
    const Eigen::VectorXd gamma = project(basis.design, f);
    CHECK((basis.design * gamma - f).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(gamma.dot(basis.penalty * gamma) < 1e-8);
  }
}

TEST_CASE("K = 20 reproduces a sine effect on simulated covariates") {
  const auto sim = simulate({.n = 2000, .nonlinear_effects = {{ShapeKind::sine, 1.0}}, .target_positive_rate = 0.1, .seed = 4});
  const Eigen::VectorXd x = sim.data.covariate("x1");
  for (auto kind : {BasisKind::thin_plate, BasisKind::cubic_regression}) {
    const auto basis = build_basis(x, {"x1", kind, 20, 2});
    Eigen::VectorXd f = x.unaryExpr([](double v) { return std::sin(M_PI * v); });
    f.array() -= f.mean();
    const Eigen::VectorXd gamma = project(basis.design, f);
    CHECK((basis.design * gamma - f).cwiseAbs().maxCoeff() < 0.05);
  }
}

TEST_CASE("evaluate_smooth reproduces training values, is linear in gamma and flags extrapolation") {
  Rng rng(5);
  Eigen::VectorXd x(250);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(0.0, 4.0);
  for (auto kind : {BasisKind::thin_plate, BasisKind::cubic_regression}) {
    const auto basis = build_basis(x, {"x", kind, 12, 2});
    Eigen::VectorXd gamma(basis.design.cols());
    for (Eigen::Index j = 0; j < gamma.size(); ++j) gamma[j] = rng.normal();
    const auto on_train = evaluate_smooth(basis.map, gamma, x);
    CHECK((on_train.values - basis.design * gamma).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_FALSE(on_train.any_extrapolated);

    const auto zero = evaluate_smooth(basis.map, Eigen::VectorXd::Zero(gamma.size()), x);
    CHECK(zero.values.isZero());

    const double range = x.maxCoeff() - x.minCoeff();
    Eigen::VectorXd beyond(3);
    beyond << x.maxCoeff() + 0.1 * range, x.maxCoeff() + 0.2 * range, x.maxCoeff() + 0.3 * range;
    const auto ext = evaluate_smooth(basis.map, gamma, beyond);
    CHECK(ext.any_extrapolated);
    CHECK(ext.extrapolated[0]);
    CHECK(ext.values.allFinite());
    // continuation is linear: equal steps give equal differences
    CHECK(std::abs((ext.values[2] - ext.values[1]) - (ext.values[1] - ext.values[0])) < 1e-9 * (1 + ext.values.cwiseAbs().maxCoeff()));
    Eigen::VectorXd below(1);
    below << x.minCoeff() - 0.1 * range;
    CHECK(evaluate_smooth(basis.map, gamma, below).extrapolated[0]);
  }
}

TEST_CASE("construction is deterministic") {
  Rng rng(6);
  Eigen::VectorXd x(1000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  for (auto kind : {BasisKind::thin_plate, BasisKind::cubic_regression}) {
    const auto a = build_basis(x, {"x", kind, 20, 2});
    const auto b = build_basis(x, {"x", kind, 20, 2});
    CHECK(a.design == b.design);
    CHECK(a.penalty == b.penalty);
  }
}

TEST_CASE("knots are capped at 200") {
  const auto basis = build_basis(equispaced(5000), {"x", BasisKind::thin_plate, 20, 2});
  CHECK(basis.map.knots.size() == kMaxKnots);
}

TEST_CASE("basis construction errors") {
  CHECK_THROWS_AS(build_basis(Eigen::VectorXd::Constant(50, 2.0), {"x", BasisKind::thin_plate, 10, 2}), DataError);
  Eigen::VectorXd few(30);
  for (Eigen::Index i = 0; i < few.size(); ++i) few[i] = static_cast<double>(i % 6);
  CHECK_THROWS_AS(build_basis(few, {"x", BasisKind::thin_plate, 10, 2}), DataError);
  CHECK_THROWS_AS(build_basis(equispaced(50), {"x", BasisKind::thin_plate, 3, 2}), ConfigError);
  CHECK_THROWS_AS(build_basis(equispaced(50), {"x", BasisKind::thin_plate, 10, 3}), ConfigError);
  CHECK_THROWS_AS(build_basis(equispaced(50), {"x", BasisKind::cubic_regression, 10, 1}), ConfigError);
  const auto basis = build_basis(equispaced(50), {"x", BasisKind::thin_plate, 10, 2});
  CHECK_THROWS_AS(evaluate_smooth(basis.map, Eigen::VectorXd::Zero(3), equispaced(5)), ConfigError);
}

}
