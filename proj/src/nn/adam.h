#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nn/tensor.h"

namespace midistring::nn {

// Bias-corrected Adam. Hyperparameter defaults follow the original
// algorithm: beta1 0.9, beta2 0.999, eps 1e-8.
template <typename T>
struct AdamState {
  std::vector<TensorT<T>> m;
  std::vector<TensorT<T>> v;
  int64_t t = 0;
  T lr = static_cast<T>(1e-3);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T eps = static_cast<T>(1e-8);

  void init_like(const std::vector<TensorT<T>*>& params) {
    m.clear();
    v.clear();
    for (const auto* p : params) {
      m.emplace_back(p->shape);
      v.emplace_back(p->shape);
    }
    t = 0;
  }
};

template <typename T>
void adam_step(const std::vector<TensorT<T>*>& params,
               const std::vector<const TensorT<T>*>& grads,
               AdamState<T>& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: parameter/state count mismatch");
  }
  state.t += 1;
  const T bc1 = T{1} - std::pow(state.beta1, static_cast<T>(state.t));
  const T bc2 = T{1} - std::pow(state.beta2, static_cast<T>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    TensorT<T>& p = *params[i];
    const TensorT<T>& g = *grads[i];
    if (!p.same_shape(g) || !p.same_shape(state.m[i])) {
      throw std::invalid_argument("adam_step: shape mismatch at parameter " +
                                  std::to_string(i));
    }
    T* m = state.m[i].data();
    T* v = state.v[i].data();
    T* pd = p.data();
    const T* gd = g.data();
    for (int64_t j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (T{1} - state.beta1) * gd[j];
      v[j] = state.beta2 * v[j] + (T{1} - state.beta2) * gd[j] * gd[j];
      const T m_hat = m[j] / bc1;
      const T v_hat = v[j] / bc2;
      pd[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace midistring::nn
