#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/result.h"

namespace midistring {

inline constexpr uint32_t kMaxVlqValue = (1u << 28) - 1;

// Standard MIDI variable-length quantity: most-significant 7-bit groups
// first, continuation bit set on all but the last byte.
// Throws std::out_of_range for values >= 2^28.
std::vector<uint8_t> encode_vlq(uint32_t value);

struct VlqDecoded {
  uint32_t value;
  size_t consumed;
};

// Inverse of encode_vlq. Errors on truncated input and on quantities that
// run past 4 bytes with the continuation bit still set.
Result<VlqDecoded, std::string> decode_vlq(std::span<const uint8_t> bytes);

}  // namespace midistring
