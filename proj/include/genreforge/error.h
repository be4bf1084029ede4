#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace genreforge {

enum class ErrorCode {
  kInvalidArgument,
  kIoFailure,
  kParseError,
  // corpus
  kEndBeforeStart,
  kAlreadySplit,
  kEmptyCell,
  kSameGenre,
  // syntax
  kMalformedLine,
  kCyclicHeads,
  kBadIndex,
  kZeroLength,
  // metre
  kBadStressString,
  kEmptyFile,
  kUnsyllabifiable,
  // metaphor
  kDuplicateId,
  kNonBinaryLabel,
  // encoding / classifier
  kMissingFeature,
  kMissingStats,
  kShapeMismatch,
  kLayoutMismatch,
  kSingleClassTrainSet,
  // evaluation
  kLengthMismatch,
  kKeyMismatch,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace genreforge
