// Blocked OpenMP kernels against their serial reference loops.
#include <benchmark/benchmark.h>

#include "bgeva/kernels.hpp"
#include "bgeva/rng.hpp"

namespace {

struct Problem {
  Eigen::MatrixXd b;
  Eigen::VectorXd y, eta, w;
};

Problem make_problem(Eigen::Index n, Eigen::Index q) {
  bgeva::Rng rng(7);
  Problem p;
  p.b.resize(n, q);
  p.y.resize(n);
  p.eta.resize(n);
  p.w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) p.b(i, j) = rng.normal();
    p.y[i] = rng.bernoulli(0.05) ? 1.0 : 0.0;
    p.eta[i] = rng.uniform(-2.0, 1.0);
    p.w[i] = rng.uniform(0.01, 1.0);
  }
  return p;
}

const auto kLink = bgeva::LinkKind::gev(-0.25);

void BM_RowTermsBlocked(benchmark::State& state) {
  const auto p = make_problem(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(bgeva::kernels::row_terms(kLink, p.y, p.eta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RowTermsSerial(benchmark::State& state) {
  const auto p = make_problem(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(bgeva::kernels::reference::row_terms(kLink, p.y, p.eta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CrossprodBlocked(benchmark::State& state) {
  const auto p = make_problem(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(bgeva::kernels::weighted_crossprod(p.b, p.w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CrossprodSerial(benchmark::State& state) {
  const auto p = make_problem(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(bgeva::kernels::reference::weighted_crossprod(p.b, p.w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ColsumBlocked(benchmark::State& state) {
  const auto p = make_problem(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(bgeva::kernels::weighted_colsum(p.b, p.w));
}

void BM_ColsumSerial(benchmark::State& state) {
  const auto p = make_problem(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(bgeva::kernels::reference::weighted_colsum(p.b, p.w));
}

}  // namespace

BENCHMARK(BM_RowTermsBlocked)->Arg(20000)->Arg(200000);
BENCHMARK(BM_RowTermsSerial)->Arg(20000)->Arg(200000);
BENCHMARK(BM_CrossprodBlocked)->Args({20000, 20})->Args({20000, 120});
BENCHMARK(BM_CrossprodSerial)->Args({20000, 20})->Args({20000, 120});
BENCHMARK(BM_ColsumBlocked)->Args({20000, 120});
BENCHMARK(BM_ColsumSerial)->Args({20000, 120});

BENCHMARK_MAIN();
