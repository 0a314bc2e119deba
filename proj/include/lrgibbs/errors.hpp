#pragma once

#include <stdexcept>
#include <string>

namespace lrgibbs {

enum class ErrorKind { domain, capacity, accuracy, config, unsupported, collapse };

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Invalid argument or parameter outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

// Dense problem larger than the configured capacity.
class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what) : Error(ErrorKind::capacity, what) {}
};

// A numerical procedure did not reach its requested tolerance.
class AccuracyError : public Error {
 public:
  explicit AccuracyError(const std::string& what) : Error(ErrorKind::accuracy, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error(ErrorKind::unsupported, what) {}
};

// MPO evolution lost all weight (trace underflow or non-finite tensors).
class NumericalCollapse : public Error {
 public:
  explicit NumericalCollapse(const std::string& what) : Error(ErrorKind::collapse, what) {}
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::accuracy: return "accuracy";
    case ErrorKind::config: return "config";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::collapse: return "collapse";
  }
  return "unknown";
}

}  // namespace lrgibbs
