#include "relclean/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace relclean::numerics {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ContractViolation("Rng::below: n must be >= 1");
  const std::uint64_t threshold = (0ULL - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double Rng::normal() {
  // u1 in (0,1] keeps the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t count) {
  if (count > n) {
    throw ContractViolation("sample_without_replacement: asked for " + std::to_string(count) +
                            " of " + std::to_string(n));
  }
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t state = base ^ (salt * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL);
  return splitmix64(state);
}

std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DropoutMask dropout_mask(Rng& rng, std::size_t len, double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ContractViolation("dropout_mask: p must be in [0,1), got " + std::to_string(p));
  }
  DropoutMask mask;
  mask.keep.resize(len);
  mask.scale = 1.0 / (1.0 - p);
  if (p == 0.0) {
    mask.keep.assign(len, 1);
    mask.scale = 1.0;
    return mask;
  }
  for (std::size_t i = 0; i < len; ++i) {
    mask.keep[i] = rng.uniform() < p ? 0 : 1;
  }
  return mask;
}

}  // namespace relclean::numerics
