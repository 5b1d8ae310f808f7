#include "bgeva/kernels.hpp"

#include <omp.h>

namespace bgeva::kernels {

namespace {

Eigen::Index block_count(Eigen::Index n) { return (n + kBlockRows - 1) / kBlockRows; }

}  // namespace

std::vector<std::size_t> infeasible_rows(const LinkKind& link, const Eigen::VectorXd& eta) {
  std::vector<std::size_t> rows;
  if (!link.is_gev()) return rows;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if (!link.feasible(eta[i])) rows.push_back(static_cast<std::size_t>(i));
  return rows;
}

RowTerms row_terms(const LinkKind& link, const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  const Eigen::Index n = eta.size();
  RowTerms out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto t = observation_terms(link, y[i], eta[i]);
    out.loglik[i] = t.loglik;
    out.d1[i] = t.d1;
    out.d2[i] = t.d2;
  }
  return out;
}

double ordered_sum(const Eigen::VectorXd& v) {
  const Eigen::Index blocks = block_count(v.size());
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    const Eigen::Index start = blk * kBlockRows;
    const Eigen::Index len = std::min(kBlockRows, v.size() - start);
    partial[static_cast<std::size_t>(blk)] = v.segment(start, len).sum();
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

Eigen::VectorXd weighted_colsum(const Eigen::MatrixXd& b, const Eigen::VectorXd& w) {
  const Eigen::Index blocks = block_count(b.rows());
  std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    const Eigen::Index start = blk * kBlockRows;
    const Eigen::Index len = std::min(kBlockRows, b.rows() - start);
    partial[static_cast<std::size_t>(blk)] = b.middleRows(start, len).transpose() * w.segment(start, len);
  }
  Eigen::VectorXd total = Eigen::VectorXd::Zero(b.cols());
  for (const auto& p : partial) total += p;
  return total;
}

Eigen::MatrixXd weighted_crossprod(const Eigen::MatrixXd& b, const Eigen::VectorXd& w) {
  const Eigen::Index blocks = block_count(b.rows());
  const Eigen::Index q = b.cols();
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    const Eigen::Index start = blk * kBlockRows;
    const Eigen::Index len = std::min(kBlockRows, b.rows() - start);
    const auto rows = b.middleRows(start, len);
    const Eigen::MatrixXd scaled = w.segment(start, len).asDiagonal() * rows;
    partial[static_cast<std::size_t>(blk)].noalias() = rows.transpose() * scaled;
  }
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(q, q);
  for (const auto& p : partial) total += p;
  // Exact symmetry regardless of GEMM rounding.
  Eigen::MatrixXd sym = total.triangularView<Eigen::Lower>();
  sym.triangularView<Eigen::StrictlyUpper>() = sym.transpose().triangularView<Eigen::StrictlyUpper>();
  return sym;
}

namespace reference {

RowTerms row_terms(const LinkKind& link, const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  const Eigen::Index n = eta.size();
  RowTerms out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto t = observation_terms(link, y[i], eta[i]);
    out.loglik[i] = t.loglik;
    out.d1[i] = t.d1;
    out.d2[i] = t.d2;
  }
  return out;
}

double ordered_sum(const Eigen::VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v[i];
  return s;
}

Eigen::VectorXd weighted_colsum(const Eigen::MatrixXd& b, const Eigen::VectorXd& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(b.cols());
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) out[j] += b(i, j) * w[i];
  return out;
}

Eigen::MatrixXd weighted_crossprod(const Eigen::MatrixXd& b, const Eigen::VectorXd& w) {
  const Eigen::Index q = b.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q, q);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < q; ++j) {
      const double bij = w[i] * b(i, j);
      for (Eigen::Index k = 0; k <= j; ++k) out(j, k) += bij * b(i, k);
    }
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index k = 0; k < j; ++k) out(k, j) = out(j, k);
  return out;
}

}  // namespace reference

}  // namespace bgeva::kernels
