#include "strap/error.hpp"

namespace strap {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingManifest: return "MISSING_MANIFEST";
    case ErrorCode::SchemaViolation: return "SCHEMA_VIOLATION";
    case ErrorCode::ShapeMismatch: return "SHAPE_MISMATCH";
    case ErrorCode::CorruptBinary: return "CORRUPT_BINARY";
    case ErrorCode::IoFailure: return "IO_FAILURE";
    case ErrorCode::ValidationFailed: return "VALIDATION_FAILED";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::TooShort: return "TOO_SHORT";
    case ErrorCode::TooFewProprioColumns: return "TOO_FEW_PROPRIO_COLUMNS";
    case ErrorCode::DimMismatch: return "DIM_MISMATCH";
    case ErrorCode::ZeroVector: return "ZERO_VECTOR";
    case ErrorCode::SizeBound: return "SIZE_BOUND";
    case ErrorCode::EmptyPrior: return "EMPTY_PRIOR";
    case ErrorCode::EmptyTarget: return "EMPTY_TARGET";
    case ErrorCode::StaleResult: return "STALE_RESULT";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::UnknownId: return "UNKNOWN_ID";
  }
  return "UNKNOWN";
}

}  // namespace strap
