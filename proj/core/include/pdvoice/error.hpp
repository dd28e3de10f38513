#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdvoice {

enum class ErrorCode {
  InvalidArgument,
  MalformedWav,
  UnsupportedEncoding,
  ClipTooShort,
  EmptyDataset,
  MissingColumn,
  NonNumericValue,
  ClassTooSmall,
  DimensionMismatch,
  SingleClass,
  DegenerateData,
  LengthMismatch,
  EmptyInput,
  SampleTooSmall,
  SampleTooLarge,
  ZeroVariance,
  TooFewGroups,
  AllTied,
  DomainError,
  TooFewRuns,
  TooFewModels,
  IoError,
  TrainingFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. Callers branch on code(); what() carries the
/// human-readable context (file, row, class name, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pdvoice
