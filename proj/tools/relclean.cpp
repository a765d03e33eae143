// relclean: pipeline driver for relevance-based cleaning of weakly-labeled
// example sets. Subcommands cover every stage: synth -> clean -> proto ->
// train -> predict -> eval/sweep, plus inspect for poking at artifacts.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
// failure. `--json` prints a machine-readable summary to stdout; progress
// goes to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "relclean/eval.hpp"
#include "relclean/io.hpp"
#include "relclean/pipeline.hpp"
#include "relclean/rng.hpp"
#include "relclean/synth.hpp"

namespace {

using json = nlohmann::json;
using namespace relclean;

// Defaults for every stage, overridable first by --config JSON and then by
// command-line flags.
struct PipelineConfig {
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned jobs = std::thread::hardware_concurrency();

  std::string features_path;
  std::string labels_path;
  std::string test_features_path;
  std::string test_labels_path;
  std::string relevance_path;
  std::string weights_path;
  std::string out_path;

  std::string method = "gcn";
  double lambda = 1.0;
  std::size_t iterations = 100;
  double gcn_lr = 0.1;
  double dropout = 0.5;
  std::size_t hidden = 16;
  std::size_t k_nn = 50;
  double alpha = 0.9;
  double lp_tolerance = 1e-10;
  std::size_t lp_max_iterations = 1000;
  double beta = 1.0;
  double linear_lr = 1.0;
  std::size_t linear_iterations = 500;

  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double lr_start = 0.1;
  double lr_end = 0.001;
  double floor = 0.1;
  double scale = 10.0;

  std::size_t k_shots = 1;
  std::size_t episodes = 5;
  std::size_t top_k = 5;
  bool cosine = false;

  std::size_t synth_classes = 10;
  std::size_t synth_dim = 32;
  std::size_t synth_clean = 1;
  std::size_t synth_noisy = 100;
  std::size_t synth_test = 100;
  double synth_kappa = 16.0;
  double synth_noise_ratio = 0.5;
  std::size_t synth_confusers = 1;
  bool synth_negatives_noise = false;
};

[[noreturn]] void config_error(const std::string& what) {
  throw ParseError("config", what);
}

template <typename T>
void read_key(const json& section, const char* key, T& into) {
  if (!section.contains(key)) return;
  try {
    into = section.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for key '") + key + "'");
  }
}

void check_known_keys(const json& section, const std::vector<std::string>& known,
                      const std::string& where) {
  for (const auto& [key, _] : section.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

void load_config_file(const std::string& path, PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path, "cannot open config file");
  }
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ParseError(path, std::string("invalid JSON: ") + e.what());
  }
  check_known_keys(root, {"seed", "jobs", "paths", "cleaner", "classifier", "eval", "synth"},
                   "config root");
  if (root.contains("seed")) {
    read_key(root, "seed", cfg.seed);
    cfg.seed_given = true;
  }
  read_key(root, "jobs", cfg.jobs);
  if (root.contains("paths")) {
    const json& paths = root.at("paths");
    check_known_keys(paths,
                     {"features", "labels", "test_features", "test_labels", "relevance",
                      "weights", "out"},
                     "paths");
    read_key(paths, "features", cfg.features_path);
    read_key(paths, "labels", cfg.labels_path);
    read_key(paths, "test_features", cfg.test_features_path);
    read_key(paths, "test_labels", cfg.test_labels_path);
    read_key(paths, "relevance", cfg.relevance_path);
    read_key(paths, "weights", cfg.weights_path);
    read_key(paths, "out", cfg.out_path);
  }
  if (root.contains("cleaner")) {
    const json& cleaner = root.at("cleaner");
    check_known_keys(cleaner,
                     {"method", "lambda", "iterations", "lr", "dropout", "hidden", "knn", "alpha",
                      "lp_tolerance", "lp_max_iterations", "beta", "linear_lr",
                      "linear_iterations"},
                     "cleaner");
    read_key(cleaner, "method", cfg.method);
    pipeline::parse_cleaner_kind(cfg.method);  // enum validated at parse time
    read_key(cleaner, "lambda", cfg.lambda);
    read_key(cleaner, "iterations", cfg.iterations);
    read_key(cleaner, "lr", cfg.gcn_lr);
    read_key(cleaner, "dropout", cfg.dropout);
    read_key(cleaner, "hidden", cfg.hidden);
    read_key(cleaner, "knn", cfg.k_nn);
    read_key(cleaner, "alpha", cfg.alpha);
    read_key(cleaner, "lp_tolerance", cfg.lp_tolerance);
    read_key(cleaner, "lp_max_iterations", cfg.lp_max_iterations);
    read_key(cleaner, "beta", cfg.beta);
    read_key(cleaner, "linear_lr", cfg.linear_lr);
    read_key(cleaner, "linear_iterations", cfg.linear_iterations);
  }
  if (root.contains("classifier")) {
    const json& cls = root.at("classifier");
    check_known_keys(cls, {"epochs", "batch_size", "lr_start", "lr_end", "floor", "scale"},
                     "classifier");
    read_key(cls, "epochs", cfg.epochs);
    read_key(cls, "batch_size", cfg.batch_size);
    read_key(cls, "lr_start", cfg.lr_start);
    read_key(cls, "lr_end", cfg.lr_end);
    read_key(cls, "floor", cfg.floor);
    read_key(cls, "scale", cfg.scale);
  }
  if (root.contains("eval")) {
    const json& ev = root.at("eval");
    check_known_keys(ev, {"k_shots", "episodes", "top_k", "cosine"}, "eval");
    read_key(ev, "k_shots", cfg.k_shots);
    read_key(ev, "episodes", cfg.episodes);
    read_key(ev, "top_k", cfg.top_k);
    read_key(ev, "cosine", cfg.cosine);
  }
  if (root.contains("synth")) {
    const json& sy = root.at("synth");
    check_known_keys(sy,
                     {"classes", "dim", "clean", "noisy", "test", "kappa", "noise_ratio",
                      "confusers", "negatives_from_noise"},
                     "synth");
    read_key(sy, "classes", cfg.synth_classes);
    read_key(sy, "dim", cfg.synth_dim);
    read_key(sy, "clean", cfg.synth_clean);
    read_key(sy, "noisy", cfg.synth_noisy);
    read_key(sy, "test", cfg.synth_test);
    read_key(sy, "kappa", cfg.synth_kappa);
    read_key(sy, "noise_ratio", cfg.synth_noise_ratio);
    read_key(sy, "confusers", cfg.synth_confusers);
    read_key(sy, "negatives_from_noise", cfg.synth_negatives_noise);
  }
}

// --seed wins, then the config file, then RELCLEAN_SEED, then 0.
void resolve_seed(PipelineConfig& cfg) {
  if (cfg.seed_given) return;
  if (const char* env = std::getenv("RELCLEAN_SEED")) {
    try {
      cfg.seed = std::stoull(env);
      cfg.seed_given = true;
    } catch (const std::exception&) {
      throw ParseError("RELCLEAN_SEED", std::string("bad seed value '") + env + "'");
    }
  }
}

pipeline::CleaningConfig cleaning_config(const PipelineConfig& cfg) {
  pipeline::CleaningConfig cleaning;
  cleaning.kind = pipeline::parse_cleaner_kind(cfg.method);
  cleaning.k_nn = cfg.k_nn;
  cleaning.gcn.lambda = cfg.lambda;
  cleaning.gcn.iterations = cfg.iterations;
  cleaning.gcn.lr = cfg.gcn_lr;
  cleaning.gcn.dropout_p = cfg.dropout;
  cleaning.gcn.hidden_m = cfg.hidden;
  cleaning.lp.alpha = cfg.alpha;
  cleaning.lp.tolerance = cfg.lp_tolerance;
  cleaning.lp.max_iterations = cfg.lp_max_iterations;
  cleaning.beta = cfg.beta;
  cleaning.linear.lr = cfg.linear_lr;
  cleaning.linear.max_iterations = cfg.linear_iterations;
  cleaning.seed = cfg.seed;
  return cleaning;
}

classifier::TrainConfig train_config(const PipelineConfig& cfg) {
  classifier::TrainConfig train;
  train.epochs = cfg.epochs;
  train.batch_size = cfg.batch_size;
  train.lr_start = cfg.lr_start;
  train.lr_end = cfg.lr_end;
  train.relevance_floor = cfg.floor;
  train.seed = cfg.seed;
  return train;
}

eval::MethodSpec method_spec(const PipelineConfig& cfg) {
  eval::MethodSpec method;
  method.cleaning = cleaning_config(cfg);
  method.use_cosine_classifier = cfg.cosine;
  method.train = train_config(cfg);
  method.scale = cfg.scale;
  method.top_k = cfg.top_k;
  return method;
}

std::vector<std::string> truth_for_test(const io::FeatureStore& test_store,
                                        const io::LabelTable& test_labels) {
  std::vector<std::string> truth(test_store.size());
  std::vector<bool> seen(test_store.size(), false);
  for (const io::LabelRow& row : test_labels.rows) {
    const std::size_t column = test_store.column_of(row.id);
    if (seen[column]) {
      throw ContractViolation("test id '" + row.id + "' labeled more than once");
    }
    seen[column] = true;
    truth[column] = row.class_id;
  }
  for (std::size_t i = 0; i < test_store.size(); ++i) {
    if (!seen[i]) {
      throw ContractViolation("test id '" + test_store.ids()[i] + "' has no label");
    }
  }
  return truth;
}

void emit_json(bool enabled, const json& summary) {
  if (enabled) std::cout << summary.dump(2) << "\n";
}

// ---- subcommand bodies ----

int cmd_clean(const PipelineConfig& cfg, const std::string& dump_graph,
              const std::string& histogram_out, bool json_out) {
  const io::FeatureStore store = io::read_feature_store(cfg.features_path);
  const io::LabelTable labels = io::read_labels(cfg.labels_path);
  const std::vector<io::ClassExampleSet> classes = io::partition_by_class(store, labels);
  pipeline::CleaningConfig cleaning = cleaning_config(cfg);
  if (!dump_graph.empty()) cleaning.dump_graph_dir = dump_graph;
  std::cerr << "cleaning " << classes.size() << " classes with method '" << cfg.method << "'\n";
  const std::vector<cleaners::RelevanceMap> maps =
      pipeline::clean_all(store, classes, cleaning, cfg.jobs);
  io::write_relevance(cfg.out_path, maps, cfg.seed);
  if (!histogram_out.empty()) {
    eval::write_histogram_csv(histogram_out, eval::cumulative_histogram(maps), cfg.seed);
  }

  std::size_t examples = 0;
  for (const auto& map : maps) examples += map.entries.size();
  emit_json(json_out, {{"command", "clean"},
                       {"method", cfg.method},
                       {"classes", maps.size()},
                       {"examples", examples},
                       {"seed", cfg.seed},
                       {"out", cfg.out_path}});
  return 0;
}

int cmd_proto(const PipelineConfig& cfg, bool json_out) {
  const io::FeatureStore store = io::read_feature_store(cfg.features_path);
  const io::LabelTable labels = io::read_labels(cfg.labels_path);
  const std::vector<io::ClassExampleSet> classes = io::partition_by_class(store, labels);
  const std::vector<cleaners::RelevanceMap> maps = io::read_relevance(cfg.relevance_path);

  // Relevance files may order classes differently; align by class id.
  std::vector<cleaners::RelevanceMap> aligned;
  for (const io::ClassExampleSet& set : classes) {
    auto it = std::find_if(maps.begin(), maps.end(), [&](const cleaners::RelevanceMap& m) {
      return m.class_id == set.class_id;
    });
    if (it == maps.end()) {
      throw ContractViolation("no relevance entries for class '" + set.class_id + "'");
    }
    aligned.push_back(*it);
  }
  const classifier::ClassifierWeights weights =
      pipeline::prototypes_from_maps(store, classes, aligned, cfg.scale);
  io::write_classifier(cfg.out_path, weights);
  emit_json(json_out, {{"command", "proto"},
                       {"classes", weights.num_classes()},
                       {"dim", weights.dim()},
                       {"scale", weights.scale},
                       {"out", cfg.out_path}});
  return 0;
}

int cmd_train(const PipelineConfig& cfg, const std::string& init_path, bool json_out) {
  const io::FeatureStore store = io::read_feature_store(cfg.features_path);
  const io::LabelTable labels = io::read_labels(cfg.labels_path);
  const std::vector<io::ClassExampleSet> classes = io::partition_by_class(store, labels);
  std::vector<cleaners::RelevanceMap> maps = io::read_relevance(cfg.relevance_path);

  std::vector<cleaners::RelevanceMap> aligned;
  for (const io::ClassExampleSet& set : classes) {
    auto it = std::find_if(maps.begin(), maps.end(), [&](const cleaners::RelevanceMap& m) {
      return m.class_id == set.class_id;
    });
    if (it == maps.end()) {
      throw ContractViolation("no relevance entries for class '" + set.class_id + "'");
    }
    aligned.push_back(*it);
  }

  classifier::ClassifierWeights init =
      init_path.empty() ? pipeline::prototypes_from_maps(store, classes, aligned, cfg.scale)
                        : io::read_classifier(init_path);
  const pipeline::TrainingArrays arrays = pipeline::training_arrays(store, classes, aligned);
  std::cerr << "training cosine classifier on " << arrays.labels.size() << " examples, "
            << cfg.epochs << " epochs\n";
  const classifier::ClassifierWeights weights = classifier::train_cosine(
      arrays.features, arrays.labels, arrays.relevance, train_config(cfg), init);
  io::write_classifier(cfg.out_path, weights);
  emit_json(json_out, {{"command", "train"},
                       {"classes", weights.num_classes()},
                       {"examples", arrays.labels.size()},
                       {"epochs", cfg.epochs},
                       {"seed", cfg.seed},
                       {"out", cfg.out_path}});
  return 0;
}

int cmd_predict(const PipelineConfig& cfg, bool json_out) {
  const classifier::ClassifierWeights weights = io::read_classifier(cfg.weights_path);
  const io::FeatureStore store = io::read_feature_store(cfg.features_path);
  const std::size_t top_k = std::min(cfg.top_k, weights.num_classes());
  std::ofstream out(cfg.out_path);
  if (!out) {
    throw ParseError(cfg.out_path, "cannot open file for writing");
  }
  out << "id,rank,class,score\n";
  char buf[32];
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::vector<double> x = store.features().column(i);
    const std::vector<classifier::Prediction> ranked =
        classifier::cosine_predict(weights, x, top_k);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.6f", ranked[r].score);
      out << store.ids()[i] << ',' << (r + 1) << ',' << ranked[r].class_id << ',' << buf << '\n';
    }
  }
  if (!out) {
    throw ParseError(cfg.out_path, "write failed");
  }
  emit_json(json_out, {{"command", "predict"},
                       {"examples", store.size()},
                       {"top_k", top_k},
                       {"out", cfg.out_path}});
  return 0;
}

int cmd_eval(const PipelineConfig& cfg, const std::string& report_out,
             const std::string& summary_out, const std::string& flags_path, bool json_out) {
  const io::FeatureStore pool = io::read_feature_store(cfg.features_path);
  const io::LabelTable labels = io::read_labels(cfg.labels_path);
  const std::vector<io::ClassExampleSet> classes = io::partition_by_class(pool, labels);
  const io::FeatureStore test_store = io::read_feature_store(cfg.test_features_path);
  const io::LabelTable test_labels = io::read_labels(cfg.test_labels_path);
  const std::vector<std::string> truth = truth_for_test(test_store, test_labels);

  eval::EpisodeSpec spec{cfg.k_shots, cfg.episodes, cfg.seed};
  const eval::MethodSpec method = method_spec(cfg);
  std::cerr << "evaluating method '" << method.name() << "', k=" << cfg.k_shots << ", "
            << cfg.episodes << " episodes\n";
  const eval::EvalReport report =
      eval::evaluate(pool, classes, test_store, truth, spec, method, cfg.jobs);

  if (!report_out.empty() || !summary_out.empty()) {
    std::vector<eval::SweepRow> rows;
    for (std::size_t e = 0; e < report.episode_accuracy.size(); ++e) {
      rows.push_back(
          {report.method, report.k_shots, report.param, e, report.episode_accuracy[e]});
    }
    if (!report_out.empty()) eval::write_report_csv(report_out, rows, cfg.seed);
    if (!summary_out.empty()) {
      std::vector<eval::SweepSummaryRow> summaries{{report.method, report.k_shots, report.param,
                                                    report.mean, report.stddev, cfg.episodes}};
      eval::write_summary_csv(summary_out, summaries, cfg.seed);
    }
  }

  json summary{{"command", "eval"},       {"method", report.method},
               {"k_shots", report.k_shots}, {"param", report.param},
               {"episodes", cfg.episodes}, {"mean_accuracy", report.mean},
               {"std_accuracy", report.stddev}, {"seed", cfg.seed},
               {"episode_accuracy", report.episode_accuracy}};

  // With ground-truth flags, also report relevance quality over a single
  // full-pool cleaning pass (all clean examples, no episode subsampling).
  if (!flags_path.empty()) {
    const std::vector<synth::TruthFlag> flags = synth::read_flags(flags_path);
    const std::vector<cleaners::RelevanceMap> maps =
        pipeline::clean_all(pool, classes, cleaning_config(cfg), cfg.jobs);
    const eval::RelevanceReport relevance = eval::relevance_report(maps, flags);
    json relevance_json{{"positives", relevance.positives},
                        {"negatives", relevance.negatives},
                        {"defined", relevance.mean_positive.has_value() &&
                                        relevance.mean_negative.has_value()}};
    if (relevance.mean_positive) relevance_json["mean_positive"] = *relevance.mean_positive;
    if (relevance.mean_negative) relevance_json["mean_negative"] = *relevance.mean_negative;
    if (relevance.noise_ratio) relevance_json["noise_ratio"] = *relevance.noise_ratio;
    summary["relevance"] = relevance_json;
  }

  emit_json(json_out, summary);
  if (!json_out) {
    std::cout << report.method << " k=" << report.k_shots << " mean=" << report.mean
              << " std=" << report.stddev << "\n";
  }
  return 0;
}

int cmd_sweep(const PipelineConfig& cfg, const std::string& param,
              const std::vector<double>& grid, const std::vector<std::size_t>& k_list,
              const std::string& report_out, const std::string& summary_out, bool json_out) {
  const io::FeatureStore pool = io::read_feature_store(cfg.features_path);
  const io::LabelTable labels = io::read_labels(cfg.labels_path);
  const std::vector<io::ClassExampleSet> classes = io::partition_by_class(pool, labels);
  const io::FeatureStore test_store = io::read_feature_store(cfg.test_features_path);
  const io::LabelTable test_labels = io::read_labels(cfg.test_labels_path);
  const std::vector<std::string> truth = truth_for_test(test_store, test_labels);

  eval::MethodSpec base = method_spec(cfg);
  json summary{{"command", "sweep"}, {"param", param}, {"grid", grid},
               {"k_shots", k_list},  {"episodes", cfg.episodes}, {"seed", cfg.seed}};

  if (param == "lambda") {
    if (base.cleaning.kind != pipeline::CleanerKind::Gcn &&
        base.cleaning.kind != pipeline::CleanerKind::Mlp) {
      throw ContractViolation("sweep --param lambda requires method gcn or mlp");
    }
    const eval::LambdaSweepResult result =
        eval::sweep_lambda(pool, classes, test_store, truth, k_list, grid, cfg.episodes, cfg.seed,
                           base, cfg.jobs);
    if (!report_out.empty()) eval::write_report_csv(report_out, result.rows, cfg.seed);
    if (!summary_out.empty()) eval::write_summary_csv(summary_out, result.summaries, cfg.seed);
    json best = json::array();
    for (const auto& [k, lambda] : result.best_lambda_per_k) {
      best.push_back({{"k_shots", k}, {"lambda", lambda}});
    }
    summary["best_lambda_per_k"] = best;
  } else if (param == "beta") {
    base.cleaning.kind = pipeline::CleanerKind::Beta;
    const eval::BetaSweepResult result = eval::sweep_beta(
        pool, classes, test_store, truth, k_list, grid, cfg.episodes, cfg.seed, base, cfg.jobs);
    if (!report_out.empty()) eval::write_report_csv(report_out, result.rows, cfg.seed);
    if (!summary_out.empty()) eval::write_summary_csv(summary_out, result.summaries, cfg.seed);
    summary["best_beta"] = result.best_beta;
  } else {
    throw ContractViolation("sweep --param must be 'lambda' or 'beta', got '" + param + "'");
  }
  emit_json(json_out, summary);
  return 0;
}

int cmd_synth(const PipelineConfig& cfg, const std::string& out_dir, bool json_out) {
  synth::SynthSpec spec;
  spec.classes = cfg.synth_classes;
  spec.dim = cfg.synth_dim;
  spec.clean_per_class = cfg.synth_clean;
  spec.noisy_per_class = cfg.synth_noisy;
  spec.test_per_class = cfg.synth_test;
  spec.kappa = cfg.synth_kappa;
  spec.noise_ratio = cfg.synth_noise_ratio;
  spec.confuser_classes = cfg.synth_confusers;
  spec.negatives_from_noise = cfg.synth_negatives_noise;
  spec.seed = cfg.seed;

  const synth::SynthDataset data = synth::generate(spec);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  io::write_feature_store(dir / "features.fsto", data.train);
  io::write_labels(dir / "labels.csv", data.labels, cfg.seed);
  synth::write_flags(dir / "flags.csv", data.flags, cfg.seed);
  if (data.test.size() > 0) {
    io::write_feature_store(dir / "test_features.fsto", data.test);
    io::write_labels(dir / "test_labels.csv", data.test_labels, cfg.seed);
  }
  emit_json(json_out, {{"command", "synth"},
                       {"classes", spec.classes},
                       {"dim", spec.dim},
                       {"train_examples", data.train.size()},
                       {"test_examples", data.test.size()},
                       {"seed", cfg.seed},
                       {"out_dir", out_dir}});
  return 0;
}

int cmd_inspect(const PipelineConfig& cfg, const std::string& flags_path, bool json_out) {
  json summary{{"command", "inspect"}};
  bool inspected = false;
  if (!cfg.features_path.empty()) {
    const io::FeatureStore store = io::read_feature_store(cfg.features_path);
    double min_norm = 0.0, max_norm = 0.0;
    for (std::size_t i = 0; i < store.size(); ++i) {
      const double norm = numerics::l2_norm(store.features().column(i));
      if (i == 0) {
        min_norm = max_norm = norm;
      } else {
        min_norm = std::min(min_norm, norm);
        max_norm = std::max(max_norm, norm);
      }
    }
    summary["features"] = {{"path", cfg.features_path}, {"examples", store.size()},
                           {"dim", store.dim()},        {"min_norm", min_norm},
                           {"max_norm", max_norm}};
    inspected = true;
  }
  if (!cfg.labels_path.empty()) {
    const io::LabelTable labels = io::read_labels(cfg.labels_path);
    std::size_t clean = 0;
    std::set<std::string> classes;
    for (const io::LabelRow& row : labels.rows) {
      classes.insert(row.class_id);
      if (row.source == cleaners::Provenance::Clean) ++clean;
    }
    summary["labels"] = {{"path", cfg.labels_path},
                         {"rows", labels.rows.size()},
                         {"classes", classes.size()},
                         {"clean", clean},
                         {"noisy", labels.rows.size() - clean}};
    inspected = true;
  }
  if (!cfg.relevance_path.empty()) {
    const std::vector<cleaners::RelevanceMap> maps = io::read_relevance(cfg.relevance_path);
    std::size_t entries = 0;
    double mean_noisy = 0.0;
    std::size_t noisy = 0;
    for (const auto& map : maps) {
      entries += map.entries.size();
      for (const auto& entry : map.entries) {
        if (entry.provenance == cleaners::Provenance::Noisy) {
          mean_noisy += entry.relevance;
          ++noisy;
        }
      }
    }
    summary["relevance"] = {{"path", cfg.relevance_path},
                            {"classes", maps.size()},
                            {"entries", entries},
                            {"mean_noisy", noisy == 0 ? 0.0 : mean_noisy / noisy}};
    inspected = true;
  }
  if (!cfg.weights_path.empty()) {
    const classifier::ClassifierWeights weights = io::read_classifier(cfg.weights_path);
    summary["weights"] = {{"path", cfg.weights_path},
                          {"classes", weights.num_classes()},
                          {"dim", weights.dim()},
                          {"scale", weights.scale}};
    inspected = true;
  }
  if (!flags_path.empty()) {
    const std::vector<synth::TruthFlag> flags = synth::read_flags(flags_path);
    std::size_t positives = 0;
    for (const auto& flag : flags) {
      if (flag.positive) ++positives;
    }
    summary["flags"] = {{"path", flags_path},
                        {"rows", flags.size()},
                        {"positives", positives},
                        {"negatives", flags.size() - positives}};
    inspected = true;
  }
  if (!inspected) {
    throw ContractViolation("inspect: pass at least one of --features/--labels/--relevance/"
                            "--weights/--flags");
  }
  (void)json_out;  // inspect output is JSON either way
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_command(int argc, char** argv) {
  PipelineConfig cfg;

  // --config is applied before flag parsing so flags override file values.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      config_path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      config_path = arg.substr(9);
    }
  }
  try {
    if (!config_path.empty()) {
      load_config_file(config_path, cfg);
    }
    resolve_seed(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"relevance-based cleaning of weakly-labeled example sets"};
  app.require_subcommand(1);
  bool json_out = false;
  std::string config_opt;
  app.add_option("--config", config_opt, "JSON config file (flags override file values)");
  app.add_flag("--json", json_out, "print a JSON summary to stdout");

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "RNG seed (fallback: RELCLEAN_SEED, then 0)");
  };
  auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs", cfg.jobs, "worker threads for per-class/per-episode jobs");
  };
  auto add_cleaner_options = [&](CLI::App* sub) {
    sub->add_option("--method", cfg.method, "cleaning method: gcn|mlp|lp|similarity|beta|linear")
        ->check(CLI::IsMember({"gcn", "mlp", "lp", "similarity", "beta", "linear"}));
    sub->add_option("--lambda", cfg.lambda, "importance weight on noisy examples (default 1.0)");
    sub->add_option("--iterations", cfg.iterations, "GCN/MLP Adam iterations (default 100)");
    sub->add_option("--lr", cfg.gcn_lr, "GCN/MLP Adam learning rate (default 0.1)");
    sub->add_option("--dropout", cfg.dropout, "hidden-layer dropout probability (default 0.5)");
    sub->add_option("--hidden", cfg.hidden, "GCN/MLP hidden width m (default 16)");
    sub->add_option("--knn", cfg.k_nn, "reciprocal kNN neighbourhood size (default 50)");
    sub->add_option("--alpha", cfg.alpha, "label-propagation alpha (default 0.9)");
    sub->add_option("--lp-tolerance", cfg.lp_tolerance, "LP solver residual tolerance");
    sub->add_option("--lp-max-iterations", cfg.lp_max_iterations, "LP solver iteration cap");
    sub->add_option("--beta", cfg.beta, "constant relevance for the beta cleaner");
    sub->add_option("--linear-lr", cfg.linear_lr, "linear-baseline learning rate");
    sub->add_option("--linear-iterations", cfg.linear_iterations, "linear-baseline iteration cap");
  };
  auto add_classifier_options = [&](CLI::App* sub) {
    sub->add_option("--epochs", cfg.epochs, "cosine-classifier epochs (default 30)");
    sub->add_option("--batch-size", cfg.batch_size, "mini-batch size (default 64)");
    sub->add_option("--lr-start", cfg.lr_start, "cosine-annealed lr start (default 0.1)");
    sub->add_option("--lr-end", cfg.lr_end, "cosine-annealed lr end (default 0.001)");
    sub->add_option("--floor", cfg.floor, "drop examples with relevance below (default 0.1)");
    sub->add_option("--scale", cfg.scale, "cosine logit scale s (default 10)");
  };

  // clean
  CLI::App* clean = app.add_subcommand("clean", "assign per-example class relevance");
  clean->add_option("--features", cfg.features_path, "feature store (.fsto)")
      ->required(config_path.empty() || cfg.features_path.empty());
  clean->add_option("--labels", cfg.labels_path, "label CSV")
      ->required(config_path.empty() || cfg.labels_path.empty());
  clean->add_option("--out", cfg.out_path, "output relevance CSV")
      ->required(config_path.empty() || cfg.out_path.empty());
  std::string dump_graph;
  clean->add_option("--dump-graph", dump_graph, "directory for per-class edge-list CSV dumps");
  std::string histogram_out;
  clean->add_option("--histogram-out", histogram_out,
                    "cumulative relevance histogram CSV output");
  add_cleaner_options(clean);
  add_seed(clean);
  add_jobs(clean);

  // proto
  CLI::App* proto = app.add_subcommand("proto", "build relevance-weighted prototype weights");
  proto->add_option("--features", cfg.features_path, "feature store (.fsto)")
      ->required(cfg.features_path.empty());
  proto->add_option("--labels", cfg.labels_path, "label CSV")->required(cfg.labels_path.empty());
  proto->add_option("--relevance", cfg.relevance_path, "relevance CSV")
      ->required(cfg.relevance_path.empty());
  proto->add_option("--out", cfg.out_path, "output weight file (.wcls)")
      ->required(cfg.out_path.empty());
  proto->add_option("--scale", cfg.scale, "cosine logit scale s (default 10)");

  // train
  CLI::App* train = app.add_subcommand("train", "train the cosine classifier");
  train->add_option("--features", cfg.features_path, "feature store (.fsto)")
      ->required(cfg.features_path.empty());
  train->add_option("--labels", cfg.labels_path, "label CSV")->required(cfg.labels_path.empty());
  train->add_option("--relevance", cfg.relevance_path, "relevance CSV")
      ->required(cfg.relevance_path.empty());
  train->add_option("--out", cfg.out_path, "output weight file (.wcls)")
      ->required(cfg.out_path.empty());
  std::string init_path;
  train->add_option("--init", init_path, "initial weights (.wcls); default: prototypes");
  add_classifier_options(train);
  add_seed(train);

  // predict
  CLI::App* predict = app.add_subcommand("predict", "rank classes for a feature store");
  predict->add_option("--weights", cfg.weights_path, "weight file (.wcls)")
      ->required(cfg.weights_path.empty());
  predict->add_option("--features", cfg.features_path, "feature store (.fsto)")
      ->required(cfg.features_path.empty());
  predict->add_option("--out", cfg.out_path, "output prediction CSV")
      ->required(cfg.out_path.empty());
  predict->add_option("--top-k", cfg.top_k, "ranks to emit per example (default 5)");

  // eval
  CLI::App* eval_cmd = app.add_subcommand("eval", "episodic few-shot evaluation");
  eval_cmd->add_option("--features", cfg.features_path, "pool feature store (.fsto)")
      ->required(cfg.features_path.empty());
  eval_cmd->add_option("--labels", cfg.labels_path, "pool label CSV")
      ->required(cfg.labels_path.empty());
  eval_cmd->add_option("--test-features", cfg.test_features_path, "test feature store (.fsto)")
      ->required(cfg.test_features_path.empty());
  eval_cmd->add_option("--test-labels", cfg.test_labels_path, "test label CSV")
      ->required(cfg.test_labels_path.empty());
  eval_cmd->add_option("--k-shots", cfg.k_shots, "clean examples drawn per class (default 1)");
  eval_cmd->add_option("--episodes", cfg.episodes, "episodes per configuration (default 5)");
  eval_cmd->add_option("--top-k", cfg.top_k, "top-k accuracy rank (default 5)");
  eval_cmd->add_flag("--cosine", cfg.cosine, "train the cosine classifier (default: prototypes)");
  std::string report_out, summary_out, flags_path;
  eval_cmd->add_option("--report-out", report_out, "per-episode CSV output");
  eval_cmd->add_option("--summary-out", summary_out, "summary CSV output");
  eval_cmd->add_option("--flags", flags_path, "ground-truth flags CSV for a relevance report");
  add_cleaner_options(eval_cmd);
  add_classifier_options(eval_cmd);
  add_seed(eval_cmd);
  add_jobs(eval_cmd);

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "grid sweep of lambda or beta");
  std::string sweep_param = "lambda";
  std::vector<double> sweep_grid;
  std::vector<std::size_t> sweep_k_list;
  sweep->add_option("--param", sweep_param, "swept parameter: lambda|beta")
      ->check(CLI::IsMember({"lambda", "beta"}));
  sweep->add_option("--grid", sweep_grid, "grid values (default 0.01,0.1,1,10)")->delimiter(',');
  sweep->add_option("--k-shots-list", sweep_k_list, "k values to sweep (default 1)")
      ->delimiter(',');
  sweep->add_option("--features", cfg.features_path, "pool feature store (.fsto)")
      ->required(cfg.features_path.empty());
  sweep->add_option("--labels", cfg.labels_path, "pool label CSV")
      ->required(cfg.labels_path.empty());
  sweep->add_option("--test-features", cfg.test_features_path, "validation feature store")
      ->required(cfg.test_features_path.empty());
  sweep->add_option("--test-labels", cfg.test_labels_path, "validation label CSV")
      ->required(cfg.test_labels_path.empty());
  sweep->add_option("--episodes", cfg.episodes, "episodes per grid point (default 5)");
  sweep->add_option("--top-k", cfg.top_k, "top-k accuracy rank (default 5)");
  sweep->add_flag("--cosine", cfg.cosine, "train the cosine classifier (default: prototypes)");
  std::string sweep_report_out, sweep_summary_out;
  sweep->add_option("--report-out", sweep_report_out, "per-episode CSV output");
  sweep->add_option("--summary-out", sweep_summary_out, "summary CSV output");
  add_cleaner_options(sweep);
  add_classifier_options(sweep);
  add_seed(sweep);
  add_jobs(sweep);

  // synth
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic benchmark");
  std::string out_dir;
  synth_cmd->add_option("--out-dir", out_dir, "output directory")->required();
  synth_cmd->add_option("--classes", cfg.synth_classes, "number of classes (default 10)");
  synth_cmd->add_option("--dim", cfg.synth_dim, "feature dimension (default 32)");
  synth_cmd->add_option("--clean", cfg.synth_clean, "clean examples per class (default 1)");
  synth_cmd->add_option("--noisy", cfg.synth_noisy, "noisy examples per class (default 100)");
  synth_cmd->add_option("--test", cfg.synth_test, "test examples per class (default 100)");
  synth_cmd->add_option("--kappa", cfg.synth_kappa, "angular concentration (default 16)");
  synth_cmd->add_option("--noise-ratio", cfg.synth_noise_ratio,
                        "fraction of noisy examples that are negatives (default 0.5)");
  synth_cmd->add_option("--confusers", cfg.synth_confusers,
                        "confuser classes per class for negatives, 0 = all (default 1)");
  synth_cmd->add_flag("--negatives-noise", cfg.synth_negatives_noise,
                      "draw negatives as uniform directions instead of other classes");
  add_seed(synth_cmd);

  // inspect
  CLI::App* inspect = app.add_subcommand("inspect", "describe artifact files");
  std::string inspect_flags;
  inspect->add_option("--features", cfg.features_path, "feature store (.fsto)");
  inspect->add_option("--labels", cfg.labels_path, "label CSV");
  inspect->add_option("--relevance", cfg.relevance_path, "relevance CSV");
  inspect->add_option("--weights", cfg.weights_path, "weight file (.wcls)");
  inspect->add_option("--flags", inspect_flags, "ground-truth flags CSV");

  for (CLI::App* sub : {clean, proto, train, predict, eval_cmd, sweep, synth_cmd, inspect}) {
    sub->fallthrough();  // parent options like --json may follow the subcommand
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sweep_grid.empty()) sweep_grid = {0.01, 0.1, 1.0, 10.0};
  if (sweep_k_list.empty()) sweep_k_list = {1};

  try {
    if (clean->parsed()) return cmd_clean(cfg, dump_graph, histogram_out, json_out);
    if (proto->parsed()) return cmd_proto(cfg, json_out);
    if (train->parsed()) return cmd_train(cfg, init_path, json_out);
    if (predict->parsed()) return cmd_predict(cfg, json_out);
    if (eval_cmd->parsed()) {
      return cmd_eval(cfg, report_out, summary_out, flags_path, json_out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(cfg, sweep_param, sweep_grid, sweep_k_list, sweep_report_out,
                       sweep_summary_out, json_out);
    }
    if (synth_cmd->parsed()) return cmd_synth(cfg, out_dir, json_out);
    if (inspect->parsed()) return cmd_inspect(cfg, inspect_flags, json_out);
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) { return run_command(argc, argv); }
