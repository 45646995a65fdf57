#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "calib/answer.hpp"
#include "calib/error.hpp"

namespace calib {

struct ReasoningStep {
  std::size_t index = 1;  // 1-based
  std::string text;
  std::optional<NormalizedAnswer> answer;
  bool is_pad = false;
};

/// A reasoning path shaped to exactly M steps; pad steps form a contiguous tail.
struct ReasoningPath {
  std::vector<ReasoningStep> steps;
  NormalizedAnswer final_answer;
  std::string raw_text;
  std::size_t true_step_count = 1;  // before truncation/padding

  /// Steps that carry content, i.e. min(true_step_count, M).
  [[nodiscard]] std::size_t real_step_count() const;
};

struct PathEnsemble {
  std::string question_id;
  std::string question;
  AnswerKind answer_kind = AnswerKind::kNumeric;
  std::vector<ReasoningPath> paths;
  std::optional<NormalizedAnswer> gold_answer;
  std::optional<std::vector<std::string>> gold_rationale_steps;

  [[nodiscard]] std::size_t path_count() const { return paths.size(); }
  [[nodiscard]] std::size_t step_count() const {
    return paths.empty() ? 0 : paths.front().steps.size();
  }
};

/// Splits a rationale into step texts. Explicit "Step k:" markers or numbered lines win;
/// otherwise the text is split on sentence boundaries. Always returns at least one segment.
std::vector<std::string> segment_steps(std::string_view rationale);

/// Truncates to the first `max_steps` steps or pads with empty steps. The final answer is
/// kept as given even when truncation drops the step that produced it.
ReasoningPath shape_path(const std::vector<std::string>& step_texts, NormalizedAnswer final_answer,
                         std::size_t max_steps,
                         const std::vector<std::optional<NormalizedAnswer>>& step_answers = {},
                         std::string raw_text = {});

struct LoadOptions {
  std::size_t max_steps = 3;
  std::optional<std::size_t> expected_paths;  // enforce N when set
};

struct EnsembleLoadResult {
  std::vector<PathEnsemble> ensembles;
  std::vector<Diagnostic> diagnostics;
};

/// Reads line-delimited ensemble records. Malformed or schema-violating lines are skipped and
/// reported as diagnostics with their line number; the remaining records still load.
EnsembleLoadResult load_ensembles(std::istream& in, const LoadOptions& options);

/// Serializes one ensemble as a single-line record with explicit steps and answers.
std::string ensemble_to_jsonl(const PathEnsemble& ensemble);

}  // namespace calib
