#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "relclean/errors.hpp"

namespace relclean::numerics {

// Moment accumulators for one parameter buffer. `step` counts completed
// updates and drives the bias correction.
struct AdamState {
  std::size_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update, in place. Raises NumericalFailure on
// non-finite gradient entries and ContractViolation on shape/lr misuse.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr);

}  // namespace relclean::numerics
