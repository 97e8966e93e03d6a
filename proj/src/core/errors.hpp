#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cryptaudit {

enum class ErrorKind {
  invalid_argument,
  config,
  io,
  parse,
  provider,
  inconsistent,
  structured_output,
  unscripted_call,
  retries_exhausted,
  budget_exceeded,
  internal,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(ErrorKind::config, key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Malformed persisted data. line is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::parse,
              line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ProviderError : public Error {
 public:
  ProviderError(std::string provider_tag, const std::string& message,
                bool transient = false)
      : Error(ErrorKind::provider, "[" + provider_tag + "] " + message),
        provider_tag_(std::move(provider_tag)),
        transient_(transient) {}
  const std::string& provider_tag() const noexcept { return provider_tag_; }
  bool transient() const noexcept { return transient_; }

 private:
  std::string provider_tag_;
  bool transient_;
};

// Model reply could not be parsed into the mandated schema. Keeps the raw
// text so callers can attach it to diagnostics.
class StructuredOutputError : public Error {
 public:
  StructuredOutputError(const std::string& message, std::string raw)
      : Error(ErrorKind::structured_output, message), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

}  // namespace cryptaudit
