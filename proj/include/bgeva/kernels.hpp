#pragma once

// Per-observation accumulation kernels used by the likelihood and the
// smoothing-parameter search. The default versions split rows into fixed
// blocks processed with OpenMP and combine block partials in block order, so
// results do not depend on the thread count. The `reference` namespace holds
// straightforward serial loops kept for testing and benchmarking.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "bgeva/links.hpp"

namespace bgeva::kernels {

inline constexpr Eigen::Index kBlockRows = 2048;

struct RowTerms {
  Eigen::VectorXd loglik;
  Eigen::VectorXd d1;  // d loglik_i / d eta_i
  Eigen::VectorXd d2;  // d2 loglik_i / d eta_i^2
};

// Rows whose predictor violates the gev support (empty for other links).
std::vector<std::size_t> infeasible_rows(const LinkKind& link, const Eigen::VectorXd& eta);

RowTerms row_terms(const LinkKind& link, const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

double ordered_sum(const Eigen::VectorXd& v);

// B^T w
Eigen::VectorXd weighted_colsum(const Eigen::MatrixXd& b, const Eigen::VectorXd& w);

// B^T diag(w) B (symmetric by construction)
Eigen::MatrixXd weighted_crossprod(const Eigen::MatrixXd& b, const Eigen::VectorXd& w);

namespace reference {

RowTerms row_terms(const LinkKind& link, const Eigen::VectorXd& y, const Eigen::VectorXd& eta);
double ordered_sum(const Eigen::VectorXd& v);
Eigen::VectorXd weighted_colsum(const Eigen::MatrixXd& b, const Eigen::VectorXd& w);
Eigen::MatrixXd weighted_crossprod(const Eigen::MatrixXd& b, const Eigen::VectorXd& w);

}  // namespace reference

}  // namespace bgeva::kernels
