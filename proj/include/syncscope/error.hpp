#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace syncscope {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedUrl : public Error {
 public:
  using Error::Error;
};

// Host is an IP literal or is itself a public suffix.
class UnresolvableSuffix : public Error {
 public:
  using Error::Error;
};

class MalformedCookie : public Error {
 public:
  using Error::Error;
};

class InfeasibleParams : public Error {
 public:
  using Error::Error;
};

class DanglingEvent : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Carries the 1-based line number (or 0-based entry index for HAR) of the
// offending record.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t index, const std::string& message)
      : Error(source + ":" + std::to_string(index) + ": " + message),
        source_(std::move(source)),
        index_(index) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::string source_;
  std::size_t index_;
};

// Non-fatal conditions collected while processing. Callers that do not care
// pass nullptr.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag)
    diag->warn(std::move(message));
}

}  // namespace syncscope
