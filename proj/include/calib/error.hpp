#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace calib {

enum class ErrorCode {
  kUnparseableAnswer,
  kInvalidShape,
  kSchemaViolation,
  kDimensionMismatch,
  kDegenerateEnsemble,
  kMissingGold,
  kTemplateNotFound,
  kInvalidTarget,
  kOracleMissing,
  kTransportError,
  kAuthError,
  kRateLimited,
  kMalformedResponse,
  kZeroVector,
  kEmptySource,
  kNoRealSteps,
  kEmptyTokens,
  kPositiveLogProb,
  kEmptyInput,
  kQuestionSetMismatch,
  kInvalidArgument,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  // Transport-class failures map to a distinct CLI exit status.
  [[nodiscard]] bool is_transport() const noexcept {
    return code_ == ErrorCode::kTransportError || code_ == ErrorCode::kAuthError ||
           code_ == ErrorCode::kRateLimited || code_ == ErrorCode::kMalformedResponse;
  }

 private:
  ErrorCode code_;
};

/// Non-fatal problem attached to a line of input or an item of work.
struct Diagnostic {
  std::size_t line = 0;  // 1-based; 0 when not tied to a line
  std::string message;
};

}  // namespace calib
