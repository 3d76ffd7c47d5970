#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace itmlab {

enum class ErrorCode {
  NonMonotoneBreakpoints,
  ImageOutOfRange,
  MixedBackends,
  OutOfDomain,
  ResourceLimit,
  BinMismatch,
  SegmentCountMismatch,
  ItineraryTooShort,
  NotARotation,
  OutOfParameterRange,
  NotClosable,
  OutOfAnalyzedRegime,
  LadderTooShort,
  NonEscaping,
  BreakpointHit,
  EmptyInput,
  InvalidArgument,
  IoError,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonMonotoneBreakpoints: return "NonMonotoneBreakpoints";
    case ErrorCode::ImageOutOfRange: return "ImageOutOfRange";
    case ErrorCode::MixedBackends: return "MixedBackends";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::ResourceLimit: return "ResourceLimit";
    case ErrorCode::BinMismatch: return "BinMismatch";
    case ErrorCode::SegmentCountMismatch: return "SegmentCountMismatch";
    case ErrorCode::ItineraryTooShort: return "ItineraryTooShort";
    case ErrorCode::NotARotation: return "NotARotation";
    case ErrorCode::OutOfParameterRange: return "OutOfParameterRange";
    case ErrorCode::NotClosable: return "NotClosable";
    case ErrorCode::OutOfAnalyzedRegime: return "OutOfAnalyzedRegime";
    case ErrorCode::LadderTooShort: return "LadderTooShort";
    case ErrorCode::NonEscaping: return "NonEscaping";
    case ErrorCode::BreakpointHit: return "BreakpointHit";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code identifies the contract that
/// was violated; `index()` carries the offending branch/breakpoint when one
/// applies (e.g. which k broke the image range condition), otherwise -1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, long index = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  long index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  long index_;
};

}  // namespace itmlab
