#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relclean/io.hpp"

namespace relclean::synth {

// Seeded benchmark geometry: class centers on the unit sphere, positives
// perturbed around their center, negatives drawn from other classes (or
// uniform noise). kappa -> infinity collapses the spread to zero.
struct SynthSpec {
  std::size_t classes = 10;
  std::size_t dim = 32;
  std::size_t clean_per_class = 1;
  std::size_t noisy_per_class = 100;
  std::size_t test_per_class = 100;
  double kappa = 16.0;       // angular concentration; perturbation scale 1/sqrt(kappa)
  double noise_ratio = 0.5;  // fraction of noisy examples that are negatives
  // Negatives of a class come from this many seeded "confuser" classes
  // (0 = all other classes), mimicking the systematic off-topic matches of
  // text-based label harvesting rather than symmetric contamination.
  std::size_t confuser_classes = 1;
  bool negatives_from_noise = false;  // uniform random directions instead of other classes
  std::uint64_t seed = 0;
};

struct TruthFlag {
  std::string id;
  std::string class_id;
  bool positive = false;
};

struct SynthDataset {
  io::FeatureStore train;        // clean + noisy pool
  io::LabelTable labels;         // labels for the pool
  std::vector<TruthFlag> flags;  // one row per noisy (id, class) pair
  io::FeatureStore test;         // held-out positives
  io::LabelTable test_labels;    // true class per test id (source clean)
};

SynthDataset generate(const SynthSpec& spec);

// Flags CSV `id,class,truth` with truth in {positive,negative}.
void write_flags(const std::filesystem::path& path, const std::vector<TruthFlag>& flags,
                 std::optional<std::uint64_t> seed = std::nullopt);
std::vector<TruthFlag> read_flags(const std::filesystem::path& path);

}  // namespace relclean::synth
