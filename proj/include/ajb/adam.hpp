#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ajb/error.hpp"

namespace ajb {

struct AdamState {
  std::size_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update of `var` in place.
inline void adam_step(AdamState& state, std::span<double> var, std::span<const double> grad,
                      double learning_rate) {
  if (var.size() != grad.size() || state.m.size() != var.size() ||
      state.v.size() != var.size()) {
    throw LengthError("adam_step: variable, gradient and moment lengths differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < var.size(); ++i) {
    const double g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    var[i] -= learning_rate * mhat / (std::sqrt(vhat) + state.eps_hat);
  }
}

}  // namespace ajb
