#include "relclean/adam.hpp"

#include <cmath>
#include <string>

namespace relclean::numerics {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw ContractViolation("adam_step: params/grads/state shapes disagree");
  }
  if (!(lr > 0.0)) {
    throw ContractViolation("adam_step: lr must be > 0, got " + std::to_string(lr));
  }
  for (double g : grads) {
    if (!std::isfinite(g)) {
      throw NumericalFailure("adam_step: non-finite gradient entry");
    }
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    if (!std::isfinite(params[i])) {
      throw NumericalFailure("adam_step: parameter overflow at step " +
                             std::to_string(state.step));
    }
  }
}

}  // namespace relclean::numerics
