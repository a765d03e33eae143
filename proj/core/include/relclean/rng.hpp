#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "relclean/errors.hpp"

namespace relclean::numerics {

// Deterministic counter-based generator (splitmix64). The same seed and the
// same call sequence produce the same stream on every platform, which the
// output-reproducibility guarantees of the whole pipeline rest on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0,1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0,n), n >= 1, unbiased.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal();

  bool bernoulli(double p);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // Draws `count` distinct indices from [0,n) by partial shuffle; the result
  // order is the draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

 private:
  std::uint64_t state_;
};

// Stable seed mixing, used to hand independent streams to per-class and
// per-episode jobs so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

// FNV-1a, used to salt seeds with class ids.
std::uint64_t hash_string(const std::string& s);

struct DropoutMask {
  std::vector<std::uint8_t> keep;  // 1 = kept, 0 = dropped
  double scale = 1.0;              // 1/(1-p), applied to kept activations
};

// Inverted dropout: each element dropped independently with probability p,
// survivors scaled by 1/(1-p). Requires 0 <= p < 1.
DropoutMask dropout_mask(Rng& rng, std::size_t len, double p);

}  // namespace relclean::numerics
