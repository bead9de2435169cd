#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strap {

enum class ErrorCode {
  MissingManifest,
  SchemaViolation,
  ShapeMismatch,
  CorruptBinary,
  IoFailure,
  ValidationFailed,
  EmptyInput,
  TooShort,
  TooFewProprioColumns,
  DimMismatch,
  ZeroVector,
  SizeBound,
  EmptyPrior,
  EmptyTarget,
  StaleResult,
  ConfigInvalid,
  UnknownId,
};

/// Stable upper-snake name used on the command line and in JSON output.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace strap
