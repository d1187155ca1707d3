#pragma once

#include <string>

#include "core/result.h"
#include "llm/backend.h"

namespace midistring {

// OpenAI-compatible chat-completions client.
// Environment: MIDISTRING_API_KEY, MIDISTRING_API_BASE, MIDISTRING_MODEL.
struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string model = "gpt-4";
  int max_retries = 5;        // on 429/5xx
  int backoff_base_ms = 1000; // doubled per retry, jittered
  int timeout_seconds = 180;
};

class RemoteHttpBackend : public LlmBackend {
 public:
  explicit RemoteHttpBackend(RemoteConfig config);
  static Result<RemoteConfig, std::string> config_from_env();

  Result<RawCompletion, BackendError> complete(
      const CompletionRequest& request) const override;
  std::string name() const override { return "remote:" + config_.model; }

 private:
  RemoteConfig config_;
};

}  // namespace midistring
