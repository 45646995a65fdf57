#include "calib/error.hpp"

#include "calib/verdicts.hpp"

namespace calib {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnparseableAnswer: return "UnparseableAnswer";
    case ErrorCode::kInvalidShape: return "InvalidShape";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDegenerateEnsemble: return "DegenerateEnsemble";
    case ErrorCode::kMissingGold: return "MissingGold";
    case ErrorCode::kTemplateNotFound: return "TemplateNotFound";
    case ErrorCode::kInvalidTarget: return "InvalidTarget";
    case ErrorCode::kOracleMissing: return "OracleMissing";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kAuthError: return "AuthError";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kEmptySource: return "EmptySource";
    case ErrorCode::kNoRealSteps: return "NoRealSteps";
    case ErrorCode::kEmptyTokens: return "EmptyTokens";
    case ErrorCode::kPositiveLogProb: return "PositiveLogProb";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kQuestionSetMismatch: return "QuestionSetMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Error";
}

std::string_view verdict_source_name(VerdictSourceKind kind) {
  switch (kind) {
    case VerdictSourceKind::kOracle: return "oracle";
    case VerdictSourceKind::kLlm: return "llm";
    case VerdictSourceKind::kSynthetic: return "synthetic";
  }
  return "oracle";
}

VerdictSourceKind parse_verdict_source(std::string_view name) {
  if (name == "oracle") return VerdictSourceKind::kOracle;
  if (name == "llm") return VerdictSourceKind::kLlm;
  if (name == "synthetic") return VerdictSourceKind::kSynthetic;
  throw Error(ErrorCode::kSchemaViolation, "unknown verdict source '" + std::string(name) + "'");
}

}  // namespace calib
