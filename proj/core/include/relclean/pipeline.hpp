#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relclean/cleaners.hpp"
#include "relclean/io.hpp"

namespace relclean::pipeline {

enum class CleanerKind { Gcn, Mlp, LabelPropagation, Similarity, Beta, Linear };

CleanerKind parse_cleaner_kind(const std::string& name);
std::string cleaner_kind_name(CleanerKind kind);

// Everything a per-class cleaning job needs. The per-class seed is derived
// from `seed` and the class id, so results do not depend on which classes
// share a run or on worker scheduling.
struct CleaningConfig {
  CleanerKind kind = CleanerKind::Gcn;
  std::size_t k_nn = 50;
  cleaners::GcnTrainConfig gcn;
  cleaners::LpConfig lp;
  double beta = 1.0;
  cleaners::LinearConfig linear;
  std::uint64_t seed = 0;
  std::filesystem::path dump_graph_dir;  // empty = no edge-list dumps
};

// Number of random negatives for the linear baseline.
std::size_t linear_negative_count(std::size_t k);

// Cleans one class of `classes`. All classes are passed so the linear
// baseline can sample negatives from the other classes' pools.
cleaners::RelevanceMap clean_class(const io::FeatureStore& store,
                                   const std::vector<io::ClassExampleSet>& classes,
                                   std::size_t class_index, const CleaningConfig& cfg);

// Cleans every class, fanning independent per-class jobs over `jobs`
// workers. The output order matches `classes` regardless of scheduling.
std::vector<cleaners::RelevanceMap> clean_all(const io::FeatureStore& store,
                                              const std::vector<io::ClassExampleSet>& classes,
                                              const CleaningConfig& cfg, unsigned jobs = 1);

// Prototype weights from per-class relevance maps whose entries are aligned
// with the class member order (clean first, then noisy).
classifier::ClassifierWeights prototypes_from_maps(
    const io::FeatureStore& store, const std::vector<io::ClassExampleSet>& classes,
    const std::vector<cleaners::RelevanceMap>& maps, double scale);

// Flattened training arrays over every class member, aligned with the maps.
struct TrainingArrays {
  numerics::DenseMatrix features;       // d x total members
  std::vector<std::size_t> labels;      // class index per member
  std::vector<double> relevance;
};

TrainingArrays training_arrays(const io::FeatureStore& store,
                               const std::vector<io::ClassExampleSet>& classes,
                               const std::vector<cleaners::RelevanceMap>& maps);

}  // namespace relclean::pipeline
