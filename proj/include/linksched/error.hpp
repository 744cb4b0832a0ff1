#pragma once

#include <stdexcept>
#include <string>

namespace linksched {

// Values double as CLI exit codes and C API status codes.
enum class ErrorCode : int {
  kInternal = 1,
  kConfig = 2,
  kInput = 3,
  kNumerical = 4,
  kCompatibility = 5,
  kState = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Invalid parameters, including brute-force size limits.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

// Unreadable/malformed inputs, missing labels, unwritable outputs.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorCode::kInput, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorCode::kNumerical, what) {}
};

class CompatibilityError : public Error {
 public:
  explicit CompatibilityError(const std::string& what) : Error(ErrorCode::kCompatibility, what) {}
};

// Shape mismatches and calls made out of order (e.g. backward without a cached forward).
class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error(ErrorCode::kState, what) {}
};

const char* error_code_name(ErrorCode code) noexcept;

}  // namespace linksched
