#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace midistring {

// Incremental SHA-256, used for manifest content hashes, checkpoint config
// hashes, and the pinned golden-byte fixtures.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, size_t len);
  void update(std::string_view text) { update(text.data(), text.size()); }
  std::array<uint8_t, 32> digest();

 private:
  void process_block(const uint8_t* block);

  std::array<uint32_t, 8> state_;
  std::array<uint8_t, 64> buffer_;
  size_t buffer_len_ = 0;
  uint64_t total_len_ = 0;
};

std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(std::string_view text);
std::string sha256_hex(const std::vector<uint8_t>& bytes);

// Empty string on read failure.
std::string sha256_file_hex(const std::string& path);

}  // namespace midistring
