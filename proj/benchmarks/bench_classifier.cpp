#include <benchmark/benchmark.h>

#include <cmath>

#include "relclean/classifier.hpp"
#include "relclean/rng.hpp"

using namespace relclean;
using classifier::ClassifierWeights;

namespace {

struct TrainingSet {
  numerics::DenseMatrix features;
  std::vector<std::size_t> labels;
  std::vector<double> relevance;
  ClassifierWeights init;
};

TrainingSet make_set(std::size_t d, std::size_t classes, std::size_t per_class) {
  numerics::Rng rng(5);
  TrainingSet set;
  set.features = numerics::DenseMatrix(d, classes * per_class);
  std::vector<std::vector<classifier::WeightedExample>> members(classes);
  std::vector<std::string> ids(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    ids[c] = "c" + std::to_string(c);
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t col = c * per_class + i;
      double sq = 0.0;
      for (std::size_t r = 0; r < d; ++r) {
        set.features(r, col) = (r == c % d ? 1.0 : 0.0) + 0.3 * rng.normal();
        sq += set.features(r, col) * set.features(r, col);
      }
      for (std::size_t r = 0; r < d; ++r) set.features(r, col) /= std::sqrt(sq);
      set.labels.push_back(c);
      const double r = rng.uniform(0.2, 1.0);
      set.relevance.push_back(r);
      members[c].push_back({col, r});
    }
  }
  set.init = classifier::compute_prototypes(set.features, ids, members, 10.0);
  return set;
}

void BM_ComputePrototypes(benchmark::State& state) {
  const TrainingSet set = make_set(64, 10, static_cast<std::size_t>(state.range(0)));
  std::vector<std::vector<classifier::WeightedExample>> members(10);
  std::vector<std::string> ids(10);
  for (std::size_t c = 0; c < 10; ++c) ids[c] = "c" + std::to_string(c);
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    members[set.labels[i]].push_back({i, set.relevance[i]});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(classifier::compute_prototypes(set.features, ids, members, 10.0));
  }
}

void BM_ClassifierGradient(benchmark::State& state) {
  const TrainingSet set = make_set(64, 10, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(classifier::classifier_grad(set.init.w, set.features, set.labels,
                                                         set.relevance, 10.0));
  }
}

void BM_TrainCosineEpoch(benchmark::State& state) {
  const TrainingSet set = make_set(64, 10, static_cast<std::size_t>(state.range(0)));
  classifier::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 64;
  cfg.seed = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        classifier::train_cosine(set.features, set.labels, set.relevance, cfg, set.init));
  }
}

}  // namespace

BENCHMARK(BM_ComputePrototypes)->Arg(101);
BENCHMARK(BM_ClassifierGradient)->Arg(32)->Arg(101);
BENCHMARK(BM_TrainCosineEpoch)->Arg(101)->Unit(benchmark::kMillisecond);
