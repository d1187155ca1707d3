#include "midi/vlq.h"

#include <stdexcept>

namespace midistring {

std::vector<uint8_t> encode_vlq(uint32_t value) {
  if (value > kMaxVlqValue) {
    throw std::out_of_range("encode_vlq: value " + std::to_string(value) +
                            " exceeds 2^28-1");
  }
  std::vector<uint8_t> out;
  out.push_back(static_cast<uint8_t>(value & 0x7F));
  value >>= 7;
  while (value > 0) {
    out.insert(out.begin(), static_cast<uint8_t>(0x80 | (value & 0x7F)));
    value >>= 7;
  }
  return out;
}

Result<VlqDecoded, std::string> decode_vlq(std::span<const uint8_t> bytes) {
  uint32_t value = 0;
  for (size_t i = 0; i < bytes.size(); ++i) {
    if (i == 4) return std::string("RunawayVlq: continuation past 4 bytes");
    value = (value << 7) | (bytes[i] & 0x7F);
    if ((bytes[i] & 0x80) == 0) return VlqDecoded{value, i + 1};
  }
  if (bytes.size() >= 4) return std::string("RunawayVlq: continuation past 4 bytes");
  return std::string("truncated VLQ");
}

}  // namespace midistring
