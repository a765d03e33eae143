#include <benchmark/benchmark.h>

#include <cmath>

#include "relclean/cleaners.hpp"
#include "relclean/graph.hpp"
#include "relclean/rng.hpp"

using namespace relclean;

namespace {

struct Instance {
  numerics::DenseMatrix v;
  graph::NormalizedAffinity at;
};

Instance make_instance(std::size_t d, std::size_t n) {
  numerics::Rng rng(7);
  numerics::DenseMatrix v(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    double sq = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      v(r, j) = rng.normal();
      sq += v(r, j) * v(r, j);
    }
    for (std::size_t r = 0; r < d; ++r) v(r, j) /= std::sqrt(sq);
  }
  Instance instance{v, graph::normalize_row_stochastic(graph::build_affinity(v, 50))};
  return instance;
}

void BM_GcnForward(benchmark::State& state) {
  const Instance instance = make_instance(64, static_cast<std::size_t>(state.range(0)));
  numerics::Rng rng(3);
  const cleaners::GcnParams params = cleaners::init_gcn_params(64, 16, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cleaners::gcn_forward(params, instance.at, instance.v));
  }
}

void BM_GcnGradient(benchmark::State& state) {
  const Instance instance = make_instance(64, static_cast<std::size_t>(state.range(0)));
  numerics::Rng rng(4);
  const cleaners::GcnParams params = cleaners::init_gcn_params(64, 16, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cleaners::gcn_grad(params, instance.at, instance.v, 1, 1.0));
  }
}

void BM_TrainGcn(benchmark::State& state) {
  const Instance instance = make_instance(64, static_cast<std::size_t>(state.range(0)));
  cleaners::GcnTrainConfig cfg;
  cfg.seed = 11;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cleaners::train_gcn(instance.v, instance.at, 1, cfg));
  }
}

}  // namespace

BENCHMARK(BM_GcnForward)->Arg(101)->Arg(256);
BENCHMARK(BM_GcnGradient)->Arg(101)->Arg(256);
BENCHMARK(BM_TrainGcn)->Arg(101)->Unit(benchmark::kMillisecond);
