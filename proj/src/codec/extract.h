#pragma once

#include <string>

#include "codec/song_json.h"
#include "core/result.h"

namespace midistring {

// Completion text exactly as returned by an LLM backend. Untrusted.
struct RawCompletion {
  std::string text;
};

// Returns the first balanced top-level {...} substring, stripping markdown
// code fences and surrounding prose. String literals and escapes inside the
// JSON are respected when balancing. Idempotent on its own output.
Result<std::string, CodecError> extract_json_payload(const RawCompletion& raw);

}  // namespace midistring
