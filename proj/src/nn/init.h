#pragma once

#include <cmath>

#include "core/rng.h"
#include "nn/tensor.h"

namespace midistring::nn {

// Kaiming-uniform for ReLU trunks, Xavier-uniform for attention projections.
template <typename T>
void kaiming_uniform(TensorT<T>& w, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (auto& x : w.v) x = static_cast<T>(rng.next_range(-bound, bound));
}

template <typename T>
void xavier_uniform(TensorT<T>& w, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& x : w.v) x = static_cast<T>(rng.next_range(-bound, bound));
}

}  // namespace midistring::nn
