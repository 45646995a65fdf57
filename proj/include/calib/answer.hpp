#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace calib {

enum class AnswerKind { kNumeric, kChoice, kFreeform };

std::string_view answer_kind_name(AnswerKind kind);
AnswerKind parse_answer_kind(std::string_view name);

/// Canonical answer form. Two answers are equal iff kind and canonical text match exactly,
/// which keeps answer grouping a partition.
struct NormalizedAnswer {
  AnswerKind kind = AnswerKind::kFreeform;
  std::string canonical;

  friend bool operator==(const NormalizedAnswer&, const NormalizedAnswer&) = default;
};

/// Canonicalizes a raw answer span.
///
/// numeric:  strips currency symbols, thousands separators and trailing zeros
///           ("$1,200.00" -> "1200", "39.0" -> "39", ".5" -> "0.5").
/// choice:   a single lowercase letter ("(B)" -> "b").
/// freeform: trimmed, lowercased, inner whitespace collapsed, trailing period dropped.
///
/// Throws Error{kUnparseableAnswer} when no numeric token or option letter can be found,
/// and Error{kInvalidArgument} for blank input.
NormalizedAnswer normalize_answer(std::string_view raw, AnswerKind kind);

/// Returns the normalized operand of the last "the answer is" cue. Without a cue, numeric
/// answers fall back to the last number in the text and choice answers to the last
/// standalone option letter. Never throws.
std::optional<NormalizedAnswer> extract_final_answer(std::string_view rationale, AnswerKind kind);

struct NumericSpan {
  std::size_t offset = 0;
  std::size_t length = 0;
  NormalizedAnswer value;
};

/// Every decimal token in `text`, in order, with its canonical numeric form.
std::vector<NumericSpan> find_numeric_spans(std::string_view text);

}  // namespace calib
