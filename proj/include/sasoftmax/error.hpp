#ifndef SASOFTMAX_ERROR_HPP
#define SASOFTMAX_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace sasoftmax {

enum class ErrorCode {
  NonFiniteInput,
  EmptyRow,
  NotNormalized,
  ShapeMismatch,
  OddHeadDim,
  CacheMismatch,
  LengthMismatch,
  EmptyHistory,
  IoError,
  CorpusTooSmall,
  UnknownSymbol,
  TextTooShort,
  NonFiniteGradient,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyRow: return "EmptyRow";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::OddHeadDim: return "OddHeadDim";
    case ErrorCode::CacheMismatch: return "CacheMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::TextTooShort: return "TextTooShort";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sasoftmax

#endif  // SASOFTMAX_ERROR_HPP
