#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace rsf {

// Numeric values double as CLI exit codes for the first four entries.
enum class ErrorCode : int {
  Config = 1,
  MissingModel = 2,
  GuaranteeDomain = 3,
  Io = 4,
  Contract = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  // Simulation step at which the error surfaced, when known.
  std::optional<std::size_t> step() const noexcept { return step_; }

  const char* what() const noexcept override { return message_.c_str(); }

  // Prefixes the message with the step; rethrow with `throw;` to keep the derived type.
  void attach_step(std::size_t step);

 private:
  ErrorCode code_;
  std::string message_;
  std::optional<std::size_t> step_;
};

// Dimension mismatches, empty inputs and other caller mistakes.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& message) : Error(ErrorCode::Contract, message) {}
};

// Arguments outside the region where a guarantee is defined (h(x) < 0, K = 0, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error(ErrorCode::GuaranteeDomain, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorCode::Io, message) {}
};

class MissingModelError : public Error {
 public:
  explicit MissingModelError(const std::string& message) : Error(ErrorCode::MissingModel, message) {}
};

enum class ConfigErrorKind { MissingFile, Syntax, UnknownKey, Invalid };

class ConfigError : public Error {
 public:
  ConfigError(ConfigErrorKind kind, const std::string& message)
      : Error(ErrorCode::Config, message), kind_(kind) {}

  ConfigErrorKind kind() const noexcept { return kind_; }

 private:
  ConfigErrorKind kind_;
};

}  // namespace rsf
