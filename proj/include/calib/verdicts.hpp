#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace calib {

enum class VerdictSourceKind { kOracle, kLlm, kSynthetic };

std::string_view verdict_source_name(VerdictSourceKind kind);
VerdictSourceKind parse_verdict_source(std::string_view name);

/// Step-correctness judgments for every path of one question: per_path[i][j] is the verdict
/// on step j+1 of path i. Pad steps are always false.
struct StepVerdicts {
  std::string question_id;
  std::vector<std::vector<bool>> per_path;
  VerdictSourceKind source = VerdictSourceKind::kOracle;

  friend bool operator==(const StepVerdicts&, const StepVerdicts&) = default;
};

}  // namespace calib
