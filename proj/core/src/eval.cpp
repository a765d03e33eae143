#include "relclean/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "relclean/parallel.hpp"
#include "relclean/rng.hpp"

namespace relclean::eval {

namespace {

// Seed salts for the independent streams of one episode.
constexpr std::uint64_t kSamplingSalt = 0x5a3c9d11;
constexpr std::uint64_t kCleaningSalt = 0xc1ea0f37;
constexpr std::uint64_t kTrainingSalt = 0x7ac35e29;

double mean_of(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v;
  return values.empty() ? 0.0 : acc / static_cast<double>(values.size());
}

double stddev_of(std::span<const double> values, double mean) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

std::string format_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError(path.string(), "cannot open file for writing");
  }
  if (seed.has_value()) out << "# seed=" << *seed << "\n";
  return out;
}

}  // namespace

std::string MethodSpec::name() const {
  std::string name = pipeline::cleaner_kind_name(cleaning.kind);
  if (use_cosine_classifier) name += "+cosine";
  return name;
}

double MethodSpec::param() const {
  switch (cleaning.kind) {
    case pipeline::CleanerKind::Gcn:
    case pipeline::CleanerKind::Mlp:
      return cleaning.gcn.lambda;
    case pipeline::CleanerKind::Beta:
      return cleaning.beta;
    case pipeline::CleanerKind::LabelPropagation:
      return cleaning.lp.alpha;
    default:
      return 0.0;
  }
}

double topk_accuracy(const std::vector<std::vector<std::string>>& rankings,
                     std::span<const std::string> truth, std::size_t top_k) {
  if (rankings.size() != truth.size()) {
    throw ContractViolation("topk_accuracy: rankings/truth lengths disagree");
  }
  if (rankings.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    if (rankings[i].size() < top_k) {
      throw ContractViolation("topk_accuracy: ranking " + std::to_string(i) + " shorter than " +
                              std::to_string(top_k));
    }
    for (std::size_t r = 0; r < top_k; ++r) {
      if (rankings[i][r] == truth[i]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

std::vector<io::ClassExampleSet> sample_episode_classes(
    const std::vector<io::ClassExampleSet>& classes, std::size_t k_shots,
    std::uint64_t episode_seed) {
  std::vector<io::ClassExampleSet> sampled(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const io::ClassExampleSet& full = classes[c];
    if (full.clean.size() < k_shots) {
      throw ContractViolation("class '" + full.class_id + "' has only " +
                              std::to_string(full.clean.size()) + " clean examples, need " +
                              std::to_string(k_shots));
    }
    numerics::Rng rng(numerics::derive_seed(numerics::derive_seed(episode_seed, kSamplingSalt),
                                            numerics::hash_string(full.class_id)));
    std::vector<std::size_t> picks = rng.sample_without_replacement(full.clean.size(), k_shots);
    std::sort(picks.begin(), picks.end());
    sampled[c].class_id = full.class_id;
    sampled[c].clean.reserve(k_shots);
    for (std::size_t p : picks) sampled[c].clean.push_back(full.clean[p]);
    sampled[c].noisy = full.noisy;
  }
  return sampled;
}

double run_episode(const io::FeatureStore& pool, const std::vector<io::ClassExampleSet>& classes,
                   const io::FeatureStore& test_store, std::span<const std::string> test_truth,
                   std::size_t k_shots, const MethodSpec& method, std::uint64_t seed,
                   unsigned jobs) {
  if (test_truth.size() != test_store.size()) {
    throw ContractViolation("run_episode: test truth not aligned with test store");
  }
  const std::vector<io::ClassExampleSet> episode_classes =
      sample_episode_classes(classes, k_shots, seed);

  pipeline::CleaningConfig cleaning = method.cleaning;
  cleaning.seed = numerics::derive_seed(seed, kCleaningSalt);
  const std::vector<cleaners::RelevanceMap> maps =
      pipeline::clean_all(pool, episode_classes, cleaning, jobs);

  classifier::ClassifierWeights weights =
      pipeline::prototypes_from_maps(pool, episode_classes, maps, method.scale);
  if (method.use_cosine_classifier) {
    const pipeline::TrainingArrays arrays = pipeline::training_arrays(pool, episode_classes, maps);
    classifier::TrainConfig train_cfg = method.train;
    train_cfg.seed = numerics::derive_seed(seed, kTrainingSalt);
    weights = classifier::train_cosine(arrays.features, arrays.labels, arrays.relevance,
                                       train_cfg, weights);
  }

  std::vector<std::vector<std::string>> rankings(test_store.size());
  for (std::size_t i = 0; i < test_store.size(); ++i) {
    const std::vector<double> x = test_store.features().column(i);
    const std::vector<classifier::Prediction> ranked =
        classifier::cosine_predict(weights, x, method.top_k);
    rankings[i].reserve(ranked.size());
    for (const classifier::Prediction& p : ranked) rankings[i].push_back(p.class_id);
  }
  return topk_accuracy(rankings, test_truth, method.top_k);
}

EvalReport evaluate(const io::FeatureStore& pool, const std::vector<io::ClassExampleSet>& classes,
                    const io::FeatureStore& test_store, std::span<const std::string> test_truth,
                    const EpisodeSpec& spec, const MethodSpec& method, unsigned jobs) {
  if (spec.episodes < 1) {
    throw ContractViolation("evaluate: episodes must be >= 1");
  }
  EvalReport report;
  report.method = method.name();
  report.k_shots = spec.k_shots;
  report.param = method.param();
  report.episode_accuracy.resize(spec.episodes);

  // Episodes fan out; each episode cleans its classes serially so the two
  // levels of parallelism do not multiply.
  const unsigned episode_jobs = spec.episodes > 1 ? jobs : 1;
  const unsigned inner_jobs = spec.episodes > 1 ? 1 : jobs;
  parallel::for_each_index(spec.episodes, episode_jobs, [&](std::size_t e) {
    const std::uint64_t episode_seed = numerics::derive_seed(spec.seed, e);
    report.episode_accuracy[e] = run_episode(pool, classes, test_store, test_truth, spec.k_shots,
                                             method, episode_seed, inner_jobs);
  });
  report.mean = mean_of(report.episode_accuracy);
  report.stddev = stddev_of(report.episode_accuracy, report.mean);
  return report;
}

namespace {

template <typename SetParam>
void sweep_grid(const io::FeatureStore& pool, const std::vector<io::ClassExampleSet>& classes,
                const io::FeatureStore& test_store, std::span<const std::string> test_truth,
                std::span<const std::size_t> k_shots_list, std::span<const double> grid,
                std::size_t episodes, std::uint64_t seed, const MethodSpec& base, unsigned jobs,
                SetParam&& set_param, std::vector<SweepRow>& rows,
                std::vector<SweepSummaryRow>& summaries,
                std::vector<std::vector<double>>& means /* [k][grid] */) {
  if (grid.empty()) {
    throw ContractViolation("sweep: empty parameter grid");
  }
  if (k_shots_list.empty()) {
    throw ContractViolation("sweep: empty k_shots list");
  }
  means.assign(k_shots_list.size(), std::vector<double>(grid.size(), 0.0));
  for (std::size_t ki = 0; ki < k_shots_list.size(); ++ki) {
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      MethodSpec method = base;
      set_param(method, grid[gi]);
      EpisodeSpec spec;
      spec.k_shots = k_shots_list[ki];
      spec.episodes = episodes;
      spec.seed = seed;
      const EvalReport report =
          evaluate(pool, classes, test_store, test_truth, spec, method, jobs);
      means[ki][gi] = report.mean;
      for (std::size_t e = 0; e < report.episode_accuracy.size(); ++e) {
        rows.push_back({report.method, spec.k_shots, grid[gi], e, report.episode_accuracy[e]});
      }
      summaries.push_back(
          {report.method, spec.k_shots, grid[gi], report.mean, report.stddev, episodes});
    }
  }
}

std::vector<double> ascending(std::span<const double> grid) {
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

}  // namespace

LambdaSweepResult sweep_lambda(const io::FeatureStore& pool,
                               const std::vector<io::ClassExampleSet>& classes,
                               const io::FeatureStore& test_store,
                               std::span<const std::string> test_truth,
                               std::span<const std::size_t> k_shots_list,
                               std::span<const double> grid, std::size_t episodes,
                               std::uint64_t seed, const MethodSpec& base, unsigned jobs) {
  const std::vector<double> sorted = ascending(grid);
  LambdaSweepResult result;
  std::vector<std::vector<double>> means;
  sweep_grid(pool, classes, test_store, test_truth, k_shots_list, sorted, episodes, seed, base,
             jobs,
             [](MethodSpec& m, double lambda) { m.cleaning.gcn.lambda = lambda; }, result.rows,
             result.summaries, means);
  for (std::size_t ki = 0; ki < k_shots_list.size(); ++ki) {
    std::size_t best = 0;
    for (std::size_t gi = 1; gi < sorted.size(); ++gi) {
      if (means[ki][gi] > means[ki][best]) best = gi;  // ties keep the smaller lambda
    }
    result.best_lambda_per_k.emplace_back(k_shots_list[ki], sorted[best]);
  }
  return result;
}

BetaSweepResult sweep_beta(const io::FeatureStore& pool,
                           const std::vector<io::ClassExampleSet>& classes,
                           const io::FeatureStore& test_store,
                           std::span<const std::string> test_truth,
                           std::span<const std::size_t> k_shots_list, std::span<const double> grid,
                           std::size_t episodes, std::uint64_t seed, const MethodSpec& base,
                           unsigned jobs) {
  const std::vector<double> sorted = ascending(grid);
  BetaSweepResult result;
  std::vector<std::vector<double>> means;
  sweep_grid(pool, classes, test_store, test_truth, k_shots_list, sorted, episodes, seed, base,
             jobs, [](MethodSpec& m, double beta) { m.cleaning.beta = beta; }, result.rows,
             result.summaries, means);
  // One beta for all k: highest mean accuracy averaged over the k values.
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t gi = 0; gi < sorted.size(); ++gi) {
    double score = 0.0;
    for (std::size_t ki = 0; ki < k_shots_list.size(); ++ki) score += means[ki][gi];
    score /= static_cast<double>(k_shots_list.size());
    if (score > best_score) {
      best_score = score;
      best = gi;
    }
  }
  result.best_beta = sorted[best];
  return result;
}

RelevanceReport relevance_report(std::span<const cleaners::RelevanceMap> maps,
                                 const std::vector<synth::TruthFlag>& flags) {
  std::map<std::pair<std::string, std::string>, bool> truth;
  for (const synth::TruthFlag& flag : flags) {
    truth[{flag.id, flag.class_id}] = flag.positive;
  }
  RelevanceReport report;
  double positive_sum = 0.0;
  double negative_sum = 0.0;
  for (const cleaners::RelevanceMap& map : maps) {
    for (const cleaners::RelevanceEntry& entry : map.entries) {
      if (entry.provenance != cleaners::Provenance::Noisy) continue;
      auto it = truth.find({entry.id, map.class_id});
      if (it == truth.end()) {
        throw ContractViolation("relevance_report: no ground-truth flag for noisy example '" +
                                entry.id + "' of class '" + map.class_id + "'");
      }
      if (it->second) {
        ++report.positives;
        positive_sum += entry.relevance;
      } else {
        ++report.negatives;
        negative_sum += entry.relevance;
      }
    }
  }
  if (report.positives > 0) {
    report.mean_positive = positive_sum / static_cast<double>(report.positives);
  }
  if (report.negatives > 0) {
    report.mean_negative = negative_sum / static_cast<double>(report.negatives);
  }
  const std::size_t total = report.positives + report.negatives;
  if (total > 0) {
    report.noise_ratio = static_cast<double>(report.negatives) / static_cast<double>(total);
  }
  return report;
}

std::vector<std::pair<double, std::size_t>> cumulative_histogram(
    std::span<const cleaners::RelevanceMap> maps, std::size_t bins) {
  if (bins < 1) {
    throw ContractViolation("cumulative_histogram: bins must be >= 1");
  }
  std::vector<std::pair<double, std::size_t>> hist(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    hist[b] = {static_cast<double>(b + 1) / static_cast<double>(bins), 0};
  }
  for (const cleaners::RelevanceMap& map : maps) {
    for (const cleaners::RelevanceEntry& entry : map.entries) {
      if (entry.provenance != cleaners::Provenance::Noisy) continue;
      for (std::size_t b = 0; b < bins; ++b) {
        if (entry.relevance <= hist[b].first) ++hist[b].second;
      }
    }
  }
  return hist;
}

void write_report_csv(const std::filesystem::path& path, std::span<const SweepRow> rows,
                      std::optional<std::uint64_t> seed) {
  std::ofstream out = open_csv(path, seed);
  out << "method,k_shots,param,episode,accuracy\n";
  for (const SweepRow& row : rows) {
    out << row.method << ',' << row.k_shots << ',' << format_param(row.param) << ',' << row.episode
        << ',' << format_fixed(row.accuracy) << '\n';
  }
  if (!out) {
    throw ParseError(path.string(), "write failed");
  }
}

void write_summary_csv(const std::filesystem::path& path, std::span<const SweepSummaryRow> rows,
                       std::optional<std::uint64_t> seed) {
  std::ofstream out = open_csv(path, seed);
  out << "method,k_shots,param,mean,std\n";
  for (const SweepSummaryRow& row : rows) {
    out << row.method << ',' << row.k_shots << ',' << format_param(row.param) << ','
        << format_fixed(row.mean) << ',' << format_fixed(row.stddev) << '\n';
  }
  if (!out) {
    throw ParseError(path.string(), "write failed");
  }
}

void write_histogram_csv(const std::filesystem::path& path,
                         std::span<const std::pair<double, std::size_t>> hist,
                         std::optional<std::uint64_t> seed) {
  std::ofstream out = open_csv(path, seed);
  out << "bin_upper,count\n";
  for (const auto& [upper, count] : hist) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", upper);
    out << buf << ',' << count << '\n';
  }
  if (!out) {
    throw ParseError(path.string(), "write failed");
  }
}

}  // namespace relclean::eval
