#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace newsdesk {

// Stable, machine-readable error codes. The string forms are part of the
// CLI contract and must not change.
enum class ErrorCode {
  kMissingFile,
  kMalformedMeta,
  kMalformedLinks,
  kNoAnchors,
  kInvalidPath,
  kInvalidThreshold,
  kMalformedGeometry,
  kOutOfBounds,
  kMissingGeometry,
  kEmptyInput,
  kEmptyTrainingSet,
  kEmptyTestSet,
  kBadMagic,
  kVersionMismatch,
  kCorruptModel,
  kMismatchedItems,
  kEmptyInputs,
  kEmptyCorpus,
  kIoFailure,
  kConfigError,
  kUnknownSnapshot,
  kInvalidBundle,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MISSING_FILE";
    case ErrorCode::kMalformedMeta: return "MALFORMED_META";
    case ErrorCode::kMalformedLinks: return "MALFORMED_LINKS";
    case ErrorCode::kNoAnchors: return "NO_ANCHORS";
    case ErrorCode::kInvalidPath: return "INVALID_PATH";
    case ErrorCode::kInvalidThreshold: return "INVALID_THRESHOLD";
    case ErrorCode::kMalformedGeometry: return "MALFORMED_GEOMETRY";
    case ErrorCode::kOutOfBounds: return "OUT_OF_BOUNDS";
    case ErrorCode::kMissingGeometry: return "MISSING_GEOMETRY";
    case ErrorCode::kEmptyInput: return "EMPTY_INPUT";
    case ErrorCode::kEmptyTrainingSet: return "EMPTY_TRAINING_SET";
    case ErrorCode::kEmptyTestSet: return "EMPTY_TEST_SET";
    case ErrorCode::kBadMagic: return "BAD_MAGIC";
    case ErrorCode::kVersionMismatch: return "VERSION_MISMATCH";
    case ErrorCode::kCorruptModel: return "CORRUPT_MODEL";
    case ErrorCode::kMismatchedItems: return "MISMATCHED_ITEMS";
    case ErrorCode::kEmptyInputs: return "EMPTY_INPUTS";
    case ErrorCode::kEmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::kIoFailure: return "IO_FAILURE";
    case ErrorCode::kConfigError: return "CONFIG_ERROR";
    case ErrorCode::kUnknownSnapshot: return "UNKNOWN_SNAPSHOT";
    case ErrorCode::kInvalidBundle: return "INVALID_BUNDLE";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return to_string(code_); }

 private:
  ErrorCode code_;
};

}  // namespace newsdesk
