#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/result.h"
#include "nn/tensor.h"

namespace midistring::nn {

// Versioned binary container of named shaped arrays, used for model
// checkpoints (parameters, optimizer moments, step and RNG counters).
// Round trips are bit-exact.
//
// Layout, all integers little-endian:
//   magic   "MSCK"
//   u32     version (1)
//   u32     entry count
//   entry*  u32 name length, name bytes,
//           u8 dtype (0 f32, 1 f64, 2 u64),
//           u8 rank, i32 dims[rank],
//           u64 payload byte length, payload
class Checkpoint {
 public:
  void put_f32(const std::string& name, const TensorT<float>& tensor);
  void put_f64(const std::string& name, const TensorT<double>& tensor);
  void put_u64(const std::string& name, uint64_t value);

  Result<TensorT<float>, std::string> get_f32(const std::string& name) const;
  Result<TensorT<double>, std::string> get_f64(const std::string& name) const;
  Result<uint64_t, std::string> get_u64(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.contains(name); }
  std::vector<std::string> names() const;

  Result<bool, std::string> save(const std::string& path) const;
  static Result<Checkpoint, std::string> load(const std::string& path);

 private:
  struct Entry {
    uint8_t dtype;
    std::vector<int> shape;
    std::vector<uint8_t> bytes;
  };
  std::map<std::string, Entry> entries_;
};

}  // namespace midistring::nn
