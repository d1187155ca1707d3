#pragma once

#include <string>

#include "codec/extract.h"
#include "core/result.h"

namespace midistring {

inline constexpr int kGenerationMaxTokens = 1200;

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.8;
  int max_tokens = kGenerationMaxTokens;
};

struct BackendError {
  std::string message;
  int http_status = 0;  // 0 for non-HTTP failures
};

// One-method backend interface. Implementations must be re-entrant:
// complete() may be called concurrently from the generation sweep.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual Result<RawCompletion, BackendError> complete(
      const CompletionRequest& request) const = 0;
  virtual std::string name() const = 0;
};

}  // namespace midistring
