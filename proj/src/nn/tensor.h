#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace midistring::nn {

// Dense row-major tensor. float for training, double for gradient checks.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> v;

  TensorT() = default;
  explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
    v.assign(static_cast<size_t>(numel(shape)), T{0});
  }
  TensorT(std::vector<int> s, std::vector<T> values)
      : shape(std::move(s)), v(std::move(values)) {
    if (static_cast<int64_t>(v.size()) != numel(shape)) {
      throw std::invalid_argument("tensor data does not match shape");
    }
  }

  static int64_t numel(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape.size()); }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  bool same_shape(const TensorT& other) const { return shape == other.shape; }

  bool operator==(const TensorT&) const = default;
};

using Tensor = TensorT<float>;

inline std::string shape_string(const std::vector<int>& shape) {
  std::string out = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    out += (i ? "," : "") + std::to_string(shape[i]);
  }
  return out + "]";
}

template <typename T>
void check_shape(const TensorT<T>& t, const std::vector<int>& expected,
                 const char* what) {
  if (t.shape != expected) {
    throw std::invalid_argument(std::string(what) + ": expected shape " +
                                shape_string(expected) + ", got " +
                                shape_string(t.shape));
  }
}

}  // namespace midistring::nn
