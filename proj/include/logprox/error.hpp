#pragma once

#include <stdexcept>
#include <string>

namespace logprox {

enum class ErrorCode {
  CycleDetected,
  IndexOutOfRange,
  DuplicateEdge,
  EmptyGroup,
  DimensionMismatch,
  NonFiniteInput,
  NonFiniteIterate,
  NoConvergence,
  CapExceeded,
  FactorizationFailure,
  InvalidStep,
  InvalidArgument,
  InsufficientData,
  Unsupported,
  ParseError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// True for errors caused by bad caller input (as opposed to a numerical failure).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::InvalidStep: return "InvalidStep";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

inline bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonFiniteIterate:
    case ErrorCode::NoConvergence:
    case ErrorCode::FactorizationFailure:
      return false;
    default:
      return true;
  }
}

}  // namespace logprox
