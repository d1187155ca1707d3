#pragma once

#include <string>
#include <utility>
#include <variant>

namespace midistring {

// Error wrapper for Result<T, E> instances where T would otherwise equal E.
struct Error {
  std::string message;
  Error(std::string m) : message(std::move(m)) {}
  Error(const char* m) : message(m) {}
};

// Minimal expected-like carrier for fallible operations.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
  Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & { return std::get<0>(v_); }
  const T& value() const& { return std::get<0>(v_); }
  T&& take() { return std::get<0>(std::move(v_)); }

  E& error() & { return std::get<1>(v_); }
  const E& error() const& { return std::get<1>(v_); }

 private:
  std::variant<T, E> v_;
};

}  // namespace midistring
