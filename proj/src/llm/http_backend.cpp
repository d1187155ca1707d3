#include "llm/http_backend.h"

#include <chrono>
#include <cstdlib>
#include <thread>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "core/rng.h"

namespace midistring {

RemoteHttpBackend::RemoteHttpBackend(RemoteConfig config)
    : config_(std::move(config)) {}

Result<RemoteConfig, std::string> RemoteHttpBackend::config_from_env() {
  RemoteConfig config;
  const char* key = std::getenv("MIDISTRING_API_KEY");
  if (!key || !*key) {
    return std::string("MIDISTRING_API_KEY is not set");
  }
  config.api_key = key;
  if (const char* base = std::getenv("MIDISTRING_API_BASE"); base && *base) {
    config.base_url = base;
  }
  if (const char* model = std::getenv("MIDISTRING_MODEL"); model && *model) {
    config.model = model;
  }
  return config;
}

namespace {

// Splits "scheme://host[:port]/prefix" into the client origin and prefix.
void split_base_url(const std::string& base_url, std::string& origin,
                    std::string& prefix) {
  auto scheme_end = base_url.find("://");
  size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = base_url.find('/', host_start);
  if (path_start == std::string::npos) {
    origin = base_url;
    prefix = "";
  } else {
    origin = base_url.substr(0, path_start);
    prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  }
}

}  // namespace

Result<RawCompletion, BackendError> RemoteHttpBackend::complete(
    const CompletionRequest& request) const {
  std::string origin, prefix;
  split_base_url(config_.base_url, origin, prefix);

  nlohmann::json body = {
      {"model", config_.model},
      {"messages", {{{"role", "user"}, {"content", request.prompt}}}},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  const std::string payload = body.dump();

  // Jitter stream tied to the request so concurrent calls do not share state.
  Rng jitter(mix_seed(0x9e3779b9, request.prompt) ^
             std::hash<std::thread::id>{}(std::this_thread::get_id()));

  BackendError last{"no attempt made", 0};
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      int backoff = config_.backoff_base_ms << (attempt - 1);
      backoff += static_cast<int>(jitter.next_below(
          static_cast<uint64_t>(std::max(1, backoff / 4))));
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
    }

    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers = {
        {"Authorization", "Bearer " + config_.api_key}};
    auto response = client.Post(prefix + "/chat/completions", headers, payload,
                                "application/json");
    if (!response) {
      last = {"transport error: " + httplib::to_string(response.error()), 0};
      continue;  // network errors are retryable
    }
    if (response->status == 429 || response->status >= 500) {
      last = {"HTTP " + std::to_string(response->status) + ": " + response->body,
              response->status};
      continue;
    }
    if (response->status != 200) {
      return BackendError{
          "HTTP " + std::to_string(response->status) + ": " + response->body,
          response->status};
    }
    nlohmann::json doc = nlohmann::json::parse(response->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") ||
        doc["choices"].empty() || !doc["choices"][0].contains("message")) {
      return BackendError{"unexpected response shape: " + response->body, 200};
    }
    return RawCompletion{
        doc["choices"][0]["message"].value("content", std::string())};
  }
  last.message = "retries exhausted; last error: " + last.message;
  return last;
}

}  // namespace midistring
