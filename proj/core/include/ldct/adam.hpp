#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ldct/tensor.hpp"

namespace ldct {

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m, v;
  long step = 0;

  explicit AdamState(const std::vector<TensorPtr<T>>& params) {
    for (const auto& p : params) {
      m.emplace_back(p->numel(), T(0));
      v.emplace_back(p->numel(), T(0));
    }
  }
};

// One bias-corrected Adam update in place, reading each parameter's grad.
template <typename T>
void adam_step(const std::vector<TensorPtr<T>>& params, AdamState<T>& state,
               T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8)) {
  if (params.size() != state.m.size())
    throw std::invalid_argument("adam_step: state does not match parameter list");
  ++state.step;
  const T bc1 = T(1) - std::pow(beta1, static_cast<T>(state.step));
  const T bc2 = T(1) - std::pow(beta2, static_cast<T>(state.step));
  for (size_t p = 0; p < params.size(); ++p) {
    auto& par = *params[p];
    auto& m = state.m[p];
    auto& v = state.v[p];
    if (m.size() != par.numel())
      throw std::invalid_argument("adam_step: parameter shape changed");
    for (size_t i = 0; i < m.size(); ++i) {
      const T g = par.grad[i];
      m[i] = beta1 * m[i] + (T(1) - beta1) * g;
      v[i] = beta2 * v[i] + (T(1) - beta2) * g * g;
      const T mhat = m[i] / bc1;
      const T vhat = v[i] / bc2;
      par.val[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace ldct
