#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relclean/classifier.hpp"
#include "relclean/io.hpp"
#include "relclean/pipeline.hpp"
#include "relclean/synth.hpp"

namespace relclean::eval {

struct EpisodeSpec {
  std::size_t k_shots = 1;
  std::size_t episodes = 5;
  std::uint64_t seed = 0;
};

// One evaluated configuration: cleaning method plus the classifier used on
// top of the cleaned relevance (fixed prototypes or trained cosine).
struct MethodSpec {
  pipeline::CleaningConfig cleaning;
  bool use_cosine_classifier = false;
  classifier::TrainConfig train;
  double scale = 10.0;
  std::size_t top_k = 1;

  std::string name() const;
  // The method's headline parameter (lambda, beta or alpha) for report rows.
  double param() const;
};

struct EvalReport {
  std::string method;
  std::size_t k_shots = 0;
  double param = 0.0;
  std::vector<double> episode_accuracy;
  double mean = 0.0;
  double stddev = 0.0;
};

// Fraction of examples whose true class appears within the first top_k
// ranked predictions.
double topk_accuracy(const std::vector<std::vector<std::string>>& rankings,
                     std::span<const std::string> truth, std::size_t top_k);

// Seeded draw of k clean examples per class (the noisy pool is kept
// whole). Exposed so tests can check subset-level determinism.
std::vector<io::ClassExampleSet> sample_episode_classes(
    const std::vector<io::ClassExampleSet>& classes, std::size_t k_shots,
    std::uint64_t episode_seed);

// One episode: sample clean subsets, clean, build the classifier, score the
// test set. `test_truth` holds the true class id per test-store column.
double run_episode(const io::FeatureStore& pool, const std::vector<io::ClassExampleSet>& classes,
                   const io::FeatureStore& test_store, std::span<const std::string> test_truth,
                   std::size_t k_shots, const MethodSpec& method, std::uint64_t seed,
                   unsigned jobs = 1);

EvalReport evaluate(const io::FeatureStore& pool, const std::vector<io::ClassExampleSet>& classes,
                    const io::FeatureStore& test_store, std::span<const std::string> test_truth,
                    const EpisodeSpec& spec, const MethodSpec& method, unsigned jobs = 1);

struct SweepRow {
  std::string method;
  std::size_t k_shots = 0;
  double param = 0.0;
  std::size_t episode = 0;
  double accuracy = 0.0;
};

struct SweepSummaryRow {
  std::string method;
  std::size_t k_shots = 0;
  double param = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t episodes = 0;
};

struct LambdaSweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSummaryRow> summaries;
  // (k_shots, best lambda) per requested k; ties resolve to the smaller
  // lambda.
  std::vector<std::pair<std::size_t, double>> best_lambda_per_k;
};

struct BetaSweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSummaryRow> summaries;
  // One beta shared across every k, by mean accuracy over all k.
  double best_beta = 1.0;
};

LambdaSweepResult sweep_lambda(const io::FeatureStore& pool,
                               const std::vector<io::ClassExampleSet>& classes,
                               const io::FeatureStore& test_store,
                               std::span<const std::string> test_truth,
                               std::span<const std::size_t> k_shots_list,
                               std::span<const double> grid, std::size_t episodes,
                               std::uint64_t seed, const MethodSpec& base, unsigned jobs = 1);

BetaSweepResult sweep_beta(const io::FeatureStore& pool,
                           const std::vector<io::ClassExampleSet>& classes,
                           const io::FeatureStore& test_store,
                           std::span<const std::string> test_truth,
                           std::span<const std::size_t> k_shots_list, std::span<const double> grid,
                           std::size_t episodes, std::uint64_t seed, const MethodSpec& base,
                           unsigned jobs = 1);

// Mean relevance of ground-truth positive and negative noisy examples plus
// the noise ratio. Means are absent (and flagged) when a side is empty.
struct RelevanceReport {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::optional<double> mean_positive;
  std::optional<double> mean_negative;
  std::optional<double> noise_ratio;
};

RelevanceReport relevance_report(std::span<const cleaners::RelevanceMap> maps,
                                 const std::vector<synth::TruthFlag>& flags);

// Cumulative histogram over the noisy relevance values: count of scores
// <= bin_upper for each of `bins` equal-width bins ending at 1.
std::vector<std::pair<double, std::size_t>> cumulative_histogram(
    std::span<const cleaners::RelevanceMap> maps, std::size_t bins = 20);

void write_report_csv(const std::filesystem::path& path, std::span<const SweepRow> rows,
                      std::optional<std::uint64_t> seed = std::nullopt);
void write_summary_csv(const std::filesystem::path& path, std::span<const SweepSummaryRow> rows,
                       std::optional<std::uint64_t> seed = std::nullopt);
void write_histogram_csv(const std::filesystem::path& path,
                         std::span<const std::pair<double, std::size_t>> hist,
                         std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace relclean::eval
