#include <doctest.h>

#include <cmath>

#include "bgeva/error.hpp"
#include "bgeva/likelihood.hpp"
#include "oracles.hpp"

using namespace bgeva;

namespace {

Dataset one_row(double y, int q = 1) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, q);
  std::vector<std::string> names;
  for (int j = 0; j < q; ++j) names.push_back("x" + std::to_string(j + 1));
  return Dataset(Eigen::VectorXd::Constant(1, y), x, names);
}

ModelDesign intercept_only(const LinkKind& link, Eigen::Index n) {
  ModelDesign d;
  d.b = Eigen::MatrixXd::Ones(n, 1);
  DesignTerm t;
  t.name = kInterceptName;
  t.span = {0, 1};
  d.terms.push_back(t);
  d.link = link;
  return d;
}

Dataset simulated(std::size_t n, std::uint64_t seed) {
  return simulate({.n = n, .link = LinkKind::logit(), .linear_effects = {0.6}, .nonlinear_effects = {{ShapeKind::sine, 1.0}},
                   .noise_covariates = 1, .target_positive_rate = 0.3, .seed = seed}).data;
}

}  // namespace

TEST_SUITE("likelihood") {

TEST_CASE("single-observation gev values") {
  const auto link = LinkKind::gev(-0.25);
  const auto design = intercept_only(link, 1);
  const Eigen::VectorXd delta = Eigen::VectorXd::Zero(1);
  CHECK(loglik(design, delta, one_row(1.0)) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(loglik(design, delta, one_row(0.0)) == doctest::Approx(std::log(1 - std::exp(-1.0))).epsilon(1e-14));
  CHECK(loglik(design, delta, one_row(0.0)) == doctest::Approx(-0.45868).epsilon(1e-5));
  // U = (1 + tau eta)^{-1-1/tau} B_1 = B_1 at eta = 0
  CHECK(score(design, delta, one_row(1.0))[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("logit log-likelihood is the Bernoulli sum") {
  Rng rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    auto p = oracle::random_problem(rng, LinkKind::logit(), 60, 5);
    const auto eval = evaluate_loglik(p.b, LinkKind::logit(), p.y, p.delta, false);
    CHECK(std::abs(eval.value - oracle::naive_loglik(LinkKind::logit(), p.y, p.b * p.delta)) < 1e-12 * (1 + std::abs(eval.value)));
  }
}

TEST_CASE("score and Hessian match finite differences") {
  Rng rng(2);
  for (auto link : {LinkKind::gev(-1.0), LinkKind::gev(-0.5), LinkKind::gev(-0.25), LinkKind::loglog(), LinkKind::logit()}) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto p = oracle::random_problem(rng, link, 40, 8);
      const auto eval = evaluate_loglik(p.b, link, p.y, p.delta, true);
      auto f = [&](const Eigen::VectorXd& d) { return oracle::naive_loglik(link, p.y, p.b * d); };
      auto g = [&](const Eigen::VectorXd& d) { return evaluate_loglik(p.b, link, p.y, d, true).score; };
      const Eigen::VectorXd fd = oracle::fd_gradient(f, p.delta, 1e-6);
      const Eigen::MatrixXd fdj = oracle::fd_jacobian(g, p.delta, 1e-6);
      CAPTURE(link.to_string());
      CHECK((eval.score - fd).cwiseAbs().maxCoeff() / (1 + eval.score.cwiseAbs().maxCoeff()) < 1e-6);
      CHECK((eval.hessian - fdj).cwiseAbs().maxCoeff() / (1 + eval.hessian.cwiseAbs().maxCoeff()) < 1e-4);
      CHECK(eval.hessian == eval.hessian.transpose());
    }
  }
}

TEST_CASE("logit Hessian equals -sum p(1-p) B_i B_i'") {
  Rng rng(3);
  const auto p = oracle::random_problem(rng, LinkKind::logit(), 80, 6);
  const auto eval = evaluate_loglik(p.b, LinkKind::logit(), p.y, p.delta, true);
  Eigen::MatrixXd closed = Eigen::MatrixXd::Zero(6, 6);
  const Eigen::VectorXd eta = p.b * p.delta;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double pr = 1 / (1 + std::exp(-eta[i]));
    closed -= pr * (1 - pr) * p.b.row(i).transpose() * p.b.row(i);
  }
  CHECK((eval.hessian - closed).cwiseAbs().maxCoeff() < 1e-12 * (1 + closed.cwiseAbs().maxCoeff()));
}

TEST_CASE("Gumbel limit of the log-likelihood") {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = oracle::random_problem(rng, LinkKind::loglog(), 50, 4, true);
    const double ll = evaluate_loglik(p.b, LinkKind::loglog(), p.y, p.delta, false).value;
    for (double tau : {1e-3, -1e-3}) {
      const double lg = evaluate_loglik(p.b, LinkKind::gev(tau), p.y, p.delta, false).value;
      CHECK(std::abs(lg - ll) < 1e-3 * 50);
    }
  }
}

TEST_CASE("infeasible predictor raises a domain error listing rows") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Ones(3, 1);
  b(1, 0) = 10.0;
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(3);
  try {
    evaluate_loglik(b, LinkKind::gev(-0.25), y, Eigen::VectorXd::Constant(1, 1.0), false);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.rows() == std::vector<std::size_t>{1});
  }
}

TEST_CASE("design layout and penalty structure") {
  const auto data = simulated(400, 5);
  const auto spec = DesignSpec::parse("s(x2) + x1 + s(x3, k=8, bs=cr)");
  const auto design = build_design(spec, data, LinkKind::logit());
  CHECK(design.q() == 1 + 1 + 19 + 7);
  CHECK(design.terms.size() == 4);
  CHECK(design.terms[0].name == kInterceptName);
  CHECK(design.terms[1].name == "x1");
  CHECK(design.terms[2].name == "x2");
  CHECK(design.terms[3].name == "x3");
  Eigen::Index next = 0;
  for (const auto& t : design.terms) {
    CHECK(t.span.start == next);
    next += t.span.size;
  }
  CHECK(next == design.q());
  Eigen::VectorXd lambdas(2);
  lambdas << 3.0, 5.0;
  const auto s = design.penalty_matrix(lambdas);
  CHECK(s.topRows(2).isZero());
  CHECK(s.leftCols(2).isZero());
  CHECK(design.b.col(0).isOnes());
  CHECK_THROWS_AS(design.penalty_matrix(-lambdas), ConfigError);
}

TEST_CASE("penalized log-likelihood") {
  const auto data = simulated(300, 6);
  const auto design = build_design(DesignSpec::parse("x1 + s(x2) + s(x3, k=6)"), data, LinkKind::logit());
  Rng rng(7);
  Eigen::VectorXd delta(design.q());
  for (Eigen::Index j = 0; j < delta.size(); ++j) delta[j] = 0.1 * rng.normal();
  const double ll = loglik(design, delta, data);
  CHECK(penalized_loglik(design, delta, Eigen::VectorXd::Zero(2), data) == ll);

  Eigen::VectorXd zero_spline = delta;
  zero_spline.tail(design.q() - 2).setZero();
  CHECK(penalized_loglik(design, zero_spline, Eigen::Vector2d(4.0, 9.0), data) == loglik(design, zero_spline, data));

  const auto& t1 = design.terms[design.term_index("x2")];
  const auto& t2 = design.terms[design.term_index("x3")];
  const Eigen::VectorXd g1 = delta.segment(t1.span.start, t1.span.size);
  const Eigen::VectorXd g2 = delta.segment(t2.span.start, t2.span.size);
  double quad1 = 0, quad2 = 0;
  for (Eigen::Index i = 0; i < g1.size(); ++i)
    for (Eigen::Index j = 0; j < g1.size(); ++j) quad1 += g1[i] * t1.penalty(i, j) * g1[j];
  for (Eigen::Index i = 0; i < g2.size(); ++i)
    for (Eigen::Index j = 0; j < g2.size(); ++j) quad2 += g2[i] * t2.penalty(i, j) * g2[j];
  const double expected = ll - 0.5 * (1.0 * quad1 + 2.0 * quad2);
  CHECK(penalized_loglik(design, delta, Eigen::Vector2d(1.0, 2.0), data) == doctest::Approx(expected).epsilon(1e-10));
  CHECK_THROWS_AS(penalized_loglik(design, delta, Eigen::Vector2d(-1.0, 2.0), data), ConfigError);
}

TEST_CASE("working quantities") {
  const auto design = intercept_only(LinkKind::logit(), 1);
  const auto ws = working_quantities(design, Eigen::VectorXd::Zero(1), one_row(1.0));
  CHECK(ws.d[0] == doctest::Approx(0.5));
  CHECK(ws.w[0] == doctest::Approx(0.25));
  CHECK(ws.z[0] == doctest::Approx(2.0));

  const auto data = simulated(200, 8);
  for (auto link : {LinkKind::gev(-0.25), LinkKind::logit(), LinkKind::loglog()}) {
    const auto d = build_design(DesignSpec::parse("x1 + s(x2, k=6)"), data, link);
    Rng rng(9);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(d.q());
    delta[0] = -0.8;
    for (Eigen::Index j = 1; j < d.q(); ++j) delta[j] = 0.1 * rng.normal();
    const auto w = working_quantities(d, delta, data);
    const Eigen::VectorXd u = score(d, delta, data);
    CHECK((d.b.transpose() * w.d - u).cwiseAbs().maxCoeff() < 1e-10 * (1 + u.cwiseAbs().maxCoeff()));
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < 20; ++i) {
      const double y = data.response()[i];
      const double eta = w.eta[i];
      const double fd = -(observation_terms(link, y, eta + h).d1 - observation_terms(link, y, eta - h).d1) / (2 * h);
      if (fd > kWeightFloor) {
        CHECK(std::abs(w.w[i] - fd) / fd < 1e-4);
        CHECK(w.z[i] == doctest::Approx(eta + w.d[i] / w.w[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("formula parsing") {
  const auto spec = DesignSpec::parse("s(x1) + x2 + s(x3, k=10, bs=cr, m=2)");
  REQUIRE(spec.terms.size() == 3);
  CHECK(spec.terms[0].kind == TermKind::smooth);
  CHECK(spec.terms[0].smooth.k == 20);
  CHECK(spec.terms[1].kind == TermKind::parametric);
  CHECK(spec.terms[2].smooth.k == 10);
  CHECK(spec.terms[2].smooth.kind == BasisKind::cubic_regression);
  CHECK(DesignSpec::parse(spec.to_string()).to_string() == spec.to_string());
  CHECK(spec.without("x2").terms.size() == 2);
  CHECK_THROWS_AS(DesignSpec::parse("s(x1) + x1"), ConfigError);
  CHECK_THROWS_AS(DesignSpec::parse("s(x1"), ConfigError);
  CHECK_THROWS_AS(DesignSpec::parse("s(x1, q=3)"), ConfigError);
}

TEST_CASE("missing covariate for a term") {
  const auto data = simulated(100, 9);
  CHECK_THROWS_AS(build_design(DesignSpec::parse("s(nope)"), data, LinkKind::logit()), DataError);
}

}
