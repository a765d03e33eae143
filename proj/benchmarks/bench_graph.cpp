#include <benchmark/benchmark.h>

#include <cmath>

#include "relclean/graph.hpp"
#include "relclean/rng.hpp"

using namespace relclean;

namespace {

numerics::DenseMatrix unit_features(std::size_t d, std::size_t n, std::uint64_t seed) {
  numerics::Rng rng(seed);
  numerics::DenseMatrix m(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    double sq = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      m(r, j) = rng.normal();
      sq += m(r, j) * m(r, j);
    }
    for (std::size_t r = 0; r < d; ++r) m(r, j) /= std::sqrt(sq);
  }
  return m;
}

void BM_BuildAffinity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const numerics::DenseMatrix v = unit_features(64, n, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(graph::build_affinity(v, 50));
  }
  state.SetComplexityN(state.range(0));
}

void BM_NormalizeRowStochastic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const graph::AffinityGraph g = graph::build_affinity(unit_features(64, n, 2), 50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(graph::normalize_row_stochastic(g));
  }
}

void BM_Spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const graph::NormalizedAffinity at =
      graph::normalize_row_stochastic(graph::build_affinity(unit_features(64, n, 3), 50));
  const numerics::DenseMatrix x = unit_features(16, n, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::spmm(at.m, x));
  }
}

}  // namespace

BENCHMARK(BM_BuildAffinity)->Arg(101)->Arg(256)->Arg(512)->Complexity();
BENCHMARK(BM_NormalizeRowStochastic)->Arg(101)->Arg(512);
BENCHMARK(BM_Spmm)->Arg(101)->Arg(512);

BENCHMARK_MAIN();
