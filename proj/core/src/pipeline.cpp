#include "relclean/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "relclean/graph.hpp"
#include "relclean/parallel.hpp"
#include "relclean/rng.hpp"

namespace relclean::pipeline {

namespace {

using numerics::DenseMatrix;
using numerics::Rng;

std::vector<std::string> member_ids(const io::FeatureStore& store,
                                    const io::ClassExampleSet& set) {
  std::vector<std::string> ids;
  ids.reserve(set.total());
  for (std::size_t column : set.clean) ids.push_back(store.ids()[column]);
  for (std::size_t column : set.noisy) ids.push_back(store.ids()[column]);
  return ids;
}

DenseMatrix sample_negatives(const io::FeatureStore& store,
                             const std::vector<io::ClassExampleSet>& classes,
                             std::size_t class_index, std::size_t count, Rng& rng) {
  std::vector<std::size_t> pool;
  std::vector<bool> own(store.size(), false);
  for (std::size_t column : classes[class_index].clean) own[column] = true;
  for (std::size_t column : classes[class_index].noisy) own[column] = true;
  std::vector<bool> pooled(store.size(), false);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (c == class_index) continue;
    for (std::size_t column : classes[c].members()) {
      if (!own[column] && !pooled[column]) {
        pooled[column] = true;
        pool.push_back(column);
      }
    }
  }
  std::sort(pool.begin(), pool.end());
  if (pool.empty()) {
    throw ContractViolation("linear cleaner: no negatives available outside class '" +
                            classes[class_index].class_id + "'");
  }
  const std::size_t take = std::min(count, pool.size());
  const std::vector<std::size_t> picks = rng.sample_without_replacement(pool.size(), take);
  std::vector<std::size_t> columns(take);
  for (std::size_t i = 0; i < take; ++i) columns[i] = pool[picks[i]];
  return numerics::gather_columns(store.features(), columns);
}

void maybe_dump_graph(const CleaningConfig& cfg, const graph::AffinityGraph& g,
                      const std::vector<std::string>& ids, const std::string& class_id) {
  if (cfg.dump_graph_dir.empty()) return;
  std::filesystem::create_directories(cfg.dump_graph_dir);
  const std::filesystem::path path = cfg.dump_graph_dir / (class_id + ".csv");
  std::ofstream out(path);
  if (!out) {
    throw ParseError(path.string(), "cannot open file for writing");
  }
  graph::write_edge_csv(g, ids, out);
}

}  // namespace

CleanerKind parse_cleaner_kind(const std::string& name) {
  if (name == "gcn") return CleanerKind::Gcn;
  if (name == "mlp") return CleanerKind::Mlp;
  if (name == "lp") return CleanerKind::LabelPropagation;
  if (name == "similarity") return CleanerKind::Similarity;
  if (name == "beta") return CleanerKind::Beta;
  if (name == "linear") return CleanerKind::Linear;
  throw ContractViolation("unknown cleaning method '" + name +
                          "' (expected gcn|mlp|lp|similarity|beta|linear)");
}

std::string cleaner_kind_name(CleanerKind kind) {
  switch (kind) {
    case CleanerKind::Gcn: return "gcn";
    case CleanerKind::Mlp: return "mlp";
    case CleanerKind::LabelPropagation: return "lp";
    case CleanerKind::Similarity: return "similarity";
    case CleanerKind::Beta: return "beta";
    case CleanerKind::Linear: return "linear";
  }
  return "?";
}

std::size_t linear_negative_count(std::size_t k) { return std::max<std::size_t>(100, 10 * k); }

cleaners::RelevanceMap clean_class(const io::FeatureStore& store,
                                   const std::vector<io::ClassExampleSet>& classes,
                                   std::size_t class_index, const CleaningConfig& cfg) {
  const io::ClassExampleSet& set = classes[class_index];
  if (set.clean.empty()) {
    throw ContractViolation("class '" + set.class_id + "' has no clean examples");
  }
  const std::size_t k = set.clean.size();
  const std::vector<std::size_t> columns = set.members();
  const DenseMatrix slice = numerics::gather_columns(store.features(), columns);
  const std::vector<std::string> ids = member_ids(store, set);
  const std::uint64_t seed =
      numerics::derive_seed(cfg.seed, numerics::hash_string(set.class_id));

  switch (cfg.kind) {
    case CleanerKind::Gcn: {
      const graph::AffinityGraph g = graph::build_affinity(slice, cfg.k_nn, ids);
      maybe_dump_graph(cfg, g, ids, set.class_id);
      cleaners::GcnTrainConfig gcn_cfg = cfg.gcn;
      gcn_cfg.seed = seed;
      return cleaners::train_gcn(slice, graph::normalize_row_stochastic(g), k, gcn_cfg,
                                 set.class_id, ids)
          .relevance;
    }
    case CleanerKind::Mlp: {
      cleaners::GcnTrainConfig gcn_cfg = cfg.gcn;
      gcn_cfg.seed = seed;
      return cleaners::train_mlp(slice, k, gcn_cfg, set.class_id, ids);
    }
    case CleanerKind::LabelPropagation: {
      const graph::AffinityGraph g = graph::build_affinity(slice, cfg.k_nn, ids);
      maybe_dump_graph(cfg, g, ids, set.class_id);
      return cleaners::label_propagation(g, k, cfg.lp, set.class_id, ids);
    }
    case CleanerKind::Similarity:
      return cleaners::similarity_relevance(slice, k, set.class_id, ids);
    case CleanerKind::Beta:
      return cleaners::beta_relevance(columns.size(), k, cfg.beta, set.class_id, ids);
    case CleanerKind::Linear: {
      Rng rng(seed);
      const DenseMatrix negatives =
          sample_negatives(store, classes, class_index, linear_negative_count(k), rng);
      return cleaners::linear_relevance(slice, k, negatives, cfg.linear, set.class_id, ids);
    }
  }
  throw ContractViolation("unhandled cleaner kind");
}

std::vector<cleaners::RelevanceMap> clean_all(const io::FeatureStore& store,
                                              const std::vector<io::ClassExampleSet>& classes,
                                              const CleaningConfig& cfg, unsigned jobs) {
  std::vector<cleaners::RelevanceMap> maps(classes.size());
  parallel::for_each_index(classes.size(), jobs, [&](std::size_t i) {
    maps[i] = clean_class(store, classes, i, cfg);
  });
  return maps;
}

classifier::ClassifierWeights prototypes_from_maps(
    const io::FeatureStore& store, const std::vector<io::ClassExampleSet>& classes,
    const std::vector<cleaners::RelevanceMap>& maps, double scale) {
  if (classes.size() != maps.size()) {
    throw ContractViolation("prototypes_from_maps: class/map count mismatch");
  }
  std::vector<std::string> class_ids(classes.size());
  std::vector<std::vector<classifier::WeightedExample>> members(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    class_ids[c] = classes[c].class_id;
    const std::vector<std::size_t> columns = classes[c].members();
    if (maps[c].entries.size() != columns.size() || maps[c].class_id != classes[c].class_id) {
      throw ContractViolation("prototypes_from_maps: map for class '" + classes[c].class_id +
                              "' is not aligned with the class members");
    }
    members[c].reserve(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) {
      members[c].push_back({columns[i], maps[c].entries[i].relevance});
    }
  }
  return classifier::compute_prototypes(store.features(), class_ids, members, scale);
}

TrainingArrays training_arrays(const io::FeatureStore& store,
                               const std::vector<io::ClassExampleSet>& classes,
                               const std::vector<cleaners::RelevanceMap>& maps) {
  if (classes.size() != maps.size()) {
    throw ContractViolation("training_arrays: class/map count mismatch");
  }
  std::vector<std::size_t> columns;
  TrainingArrays arrays;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const std::vector<std::size_t> class_columns = classes[c].members();
    if (maps[c].entries.size() != class_columns.size()) {
      throw ContractViolation("training_arrays: map for class '" + classes[c].class_id +
                              "' is not aligned with the class members");
    }
    for (std::size_t i = 0; i < class_columns.size(); ++i) {
      columns.push_back(class_columns[i]);
      arrays.labels.push_back(c);
      arrays.relevance.push_back(maps[c].entries[i].relevance);
    }
  }
  arrays.features = numerics::gather_columns(store.features(), columns);
  return arrays;
}

}  // namespace relclean::pipeline
