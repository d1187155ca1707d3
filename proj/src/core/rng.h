#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace midistring {

// SplitMix64 generator. Deterministic across platforms and compilers, which
// std::uniform_* distributions are not; every seeded choice in the project
// flows through this.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Requires n > 0.
  uint64_t next_below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform integer in [lo, hi], inclusive.
  int next_int(int lo, int hi) {
    return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo) + 1));
  }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

 private:
  uint64_t state_;
};

// Named sub-seed derivation so independent streams never share state.
inline uint64_t mix_seed(uint64_t base, std::string_view stream) {
  uint64_t h = 0xCBF29CE484222325ull ^ base;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return Rng(h).next_u64();
}

inline uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b = 0,
                         uint64_t c = 0) {
  Rng r(base ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xC2B2AE3D27D4EB4Full) ^
        (c * 0x165667B19E3779F9ull));
  return r.next_u64();
}

}  // namespace midistring
