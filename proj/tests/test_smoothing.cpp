#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bgeva/error.hpp"
#include "bgeva/fit.hpp"
#include "oracles.hpp"

using namespace bgeva;

namespace {

Dataset covariates_only(const Eigen::MatrixXd& x) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  return Dataset(Eigen::VectorXd::Zero(x.rows()), x, names);
}

WorkingState gaussian_working(const Eigen::VectorXd& z, const Eigen::VectorXd& w) {
  WorkingState ws;
  ws.z = z;
  ws.w = w;
  ws.eta = Eigen::VectorXd::Zero(z.size());
  ws.d = Eigen::VectorXd::Zero(z.size());
  return ws;
}

}  // namespace

TEST_SUITE("smoothing") {

TEST_CASE("saturated interpolating case gives UBRE = 1") {
  const Eigen::MatrixXd x = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
  const auto design = build_design(DesignSpec::parse("s(x1, k=10)"), covariates_only(x), LinkKind::logit());
  REQUIRE(design.q() == 10);
  Rng rng(1);
  Eigen::VectorXd beta(10);
  for (Eigen::Index j = 0; j < 10; ++j) beta[j] = rng.normal();
  const auto ws = gaussian_working(design.b * beta, Eigen::VectorXd::Ones(10));
  const auto u = ubre(ws, design, Eigen::VectorXd::Zero(1));
  CHECK(u.edf_total == doctest::Approx(10.0).epsilon(1e-8));
  CHECK(std::abs(u.value - 1.0) < 1e-8);
}

TEST_CASE("huge smoothing parameters leave only the null spaces") {
  Rng rng(2);
  Eigen::MatrixXd x(300, 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << rng.uniform(), rng.uniform(), rng.uniform();
  const auto design = build_design(DesignSpec::parse("x1 + s(x2) + s(x3, k=8, bs=cr)"), covariates_only(x), LinkKind::logit());
  Eigen::VectorXd z(300), w(300);
  for (Eigen::Index i = 0; i < 300; ++i) {
    z[i] = rng.normal();
    w[i] = rng.uniform(0.2, 1.0);
  }
  const auto u = ubre(gaussian_working(z, w), design, Eigen::VectorXd::Constant(2, 1e10));
  CHECK(u.edf_total == doctest::Approx(1 + 1 + 2).epsilon(1e-4));
}

TEST_CASE("trace and UBRE match the explicit hat matrix") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 30 + 2 * rep;
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i) x.row(i) << rng.uniform(), rng.uniform();
    const auto design = build_design(DesignSpec::parse("x1 + s(x2, k=6)"), covariates_only(x), LinkKind::logit());
    REQUIRE(design.q() == 7);
    Eigen::VectorXd z(n), w(n);
    for (int i = 0; i < n; ++i) {
      z[i] = rng.normal() * 2;
      w[i] = rng.uniform(0.05, 2.0);
    }
    const Eigen::VectorXd lambdas = Eigen::VectorXd::Constant(1, std::pow(10.0, rng.uniform(-3.0, 3.0)));
    const auto u = ubre(gaussian_working(z, w), design, lambdas);
    const auto o = oracle::dense_hat(design.b, w, z, design.penalty_matrix(lambdas));
    CHECK(std::abs(u.edf_total - o.trace) < 1e-8);
    CHECK(std::abs(u.value - o.ubre) < 1e-8);
  }
}

TEST_CASE("edf decreases as one smoothing parameter grows") {
  Rng rng(4);
  Eigen::MatrixXd x(400, 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << rng.uniform(), rng.uniform();
  const auto design = build_design(DesignSpec::parse("s(x1) + s(x2)"), covariates_only(x), LinkKind::logit());
  Eigen::VectorXd z(400);
  for (Eigen::Index i = 0; i < 400; ++i) z[i] = std::sin(6 * x(i, 0)) + rng.normal();
  const auto ws = gaussian_working(z, Eigen::VectorXd::Ones(400));
  for (int which = 0; which < 2; ++which) {
    double prev = 1e300;
    for (double l : {1e-4, 1e-2, 1.0, 1e2, 1e4}) {
      Eigen::VectorXd lambdas = Eigen::VectorXd::Constant(2, 1.0);
      lambdas[which] = l;
      const double edf = ubre(ws, design, lambdas).edf_total;
      CHECK(edf < prev);
      prev = edf;
    }
  }
}

TEST_CASE("straight-line truth selects heavy smoothing") {
  // UBRE under-smooths now and then, so the claim is checked on the median replicate
  std::vector<double> lambdas, edfs;
  for (std::uint64_t seed = 1; seed <= 21; ++seed) {
    Rng rng(seed);
    const int n = 500;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rng.uniform();
      z[i] = 2 * x(i, 0) + 0.3 * rng.normal();
    }
    const auto design = build_design(DesignSpec::parse("s(x1)"), covariates_only(x), LinkKind::logit());
    const auto st = select_lambda(gaussian_working(z, Eigen::VectorXd::Ones(n) / 0.09), design, FitConfig{});
    lambdas.push_back(st.lambdas[0]);
    edfs.push_back(st.edf_per_term[0]);
  }
  std::sort(lambdas.begin(), lambdas.end());
  std::sort(edfs.begin(), edfs.end());
  CHECK(lambdas[10] >= 1e3);
  CHECK(edfs[10] < 1.2);
}

TEST_CASE("rapidly oscillating truth selects light smoothing") {
  Rng rng(6);
  const int n = 3000;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform();
    z[i] = std::sin(6 * M_PI * x(i, 0)) + 0.1 * rng.normal();
  }
  const auto design = build_design(DesignSpec::parse("s(x1)"), covariates_only(x), LinkKind::logit());
  const auto st = select_lambda(gaussian_working(z, Eigen::VectorXd::Ones(n) / 0.01), design, FitConfig{});
  CHECK(st.lambdas[0] <= 1e-2);
  CHECK(st.edf_per_term[0] > 20 / 2.0);
}

TEST_CASE("returned UBRE is no larger than any evaluated point") {
  Rng rng(7);
  const int n = 600;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd z(n), w(n);
  for (int i = 0; i < n; ++i) {
    x.row(i) << rng.uniform(), rng.uniform(), rng.uniform();
    z[i] = std::sin(4 * x(i, 0)) + x(i, 1) * x(i, 1) + 0.5 * rng.normal();
    w[i] = rng.uniform(1.0, 4.0);
  }
  const auto design = build_design(DesignSpec::parse("s(x1, k=10) + s(x2, k=10) + s(x3, k=10)"), covariates_only(x), LinkKind::logit());
  LambdaSearchLog log;
  const auto st = select_lambda(gaussian_working(z, w), design, FitConfig{}, std::nullopt, &log);
  REQUIRE(!log.evaluations.empty());
  for (const auto& [point, value] : log.evaluations) CHECK(st.ubre <= value + 1e-15);
  for (Eigen::Index j = 0; j < 3; ++j) {
    CHECK(st.lambdas[j] >= 1e-6 * (1 - 1e-12));
    CHECK(st.lambdas[j] <= 1e6 * (1 + 1e-12));
  }
  // edf bounds of the state
  CHECK(st.edf_total > 0);
  CHECK(st.edf_total <= design.q());
  for (double e : st.edf_per_term) {
    CHECK(e > 0);
    CHECK(e <= 9 + 1e-9);
  }
}

}
