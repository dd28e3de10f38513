#include "pdvoice/error.hpp"

namespace pdvoice {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedWav: return "MalformedWav";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::ClipTooShort: return "ClipTooShort";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::SampleTooLarge: return "SampleTooLarge";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooFewGroups: return "TooFewGroups";
    case ErrorCode::AllTied: return "AllTied";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::TooFewRuns: return "TooFewRuns";
    case ErrorCode::TooFewModels: return "TooFewModels";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TrainingFailed: return "TrainingFailed";
  }
  return "Unknown";
}

}  // namespace pdvoice
