#pragma once

#include <stdexcept>
#include <string>

namespace acf {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-parseable token (used by the CLI and the HTTP service).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Input that violates a documented file or log format.
class MalformedInput : public Error {
 public:
  explicit MalformedInput(const std::string& message) : Error("malformed_input", message) {}
};

/// A caller broke a precondition (dimension mismatch, bad argument).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& message)
      : Error("contract_violation", message) {}
};

/// Well-formed data that cannot be used (corpus too short, reducible chain, ...).
class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error("data_error", message) {}
};

/// A keep-set filter removed all probability mass.
class FilterError : public Error {
 public:
  explicit FilterError(const std::string& message) : Error("filter_empty", message) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& message) : Error("not_found", message) {}
};

}  // namespace acf
