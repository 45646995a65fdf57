#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calib/ensemble.hpp"
#include "calib/verdicts.hpp"

namespace calib {

/// Per-path unified score: d = alpha * n/N + (1 - alpha) * m/M.
struct PathScore {
  std::size_t path_index = 0;
  std::size_t n = 1;  // paths sharing this path's final answer, itself included
  std::size_t m = 0;  // verified-correct real steps
  double d = 0.0;
};

enum class TieBreak { kLowestIndex };

struct CalibrationConfig {
  double alpha = 0.5;
  TieBreak tie_break = TieBreak::kLowestIndex;
  std::size_t n_paths = 10;
  std::size_t max_steps = 3;

  void validate() const;
};

enum class StrategyKind { kSelfConsistency, kSelfVerification, kUnified };

struct Strategy {
  StrategyKind kind = StrategyKind::kUnified;
  double alpha = 0.5;  // meaningful for kUnified only

  static Strategy self_consistency() { return {StrategyKind::kSelfConsistency, 1.0}; }
  static Strategy self_verification() { return {StrategyKind::kSelfVerification, 0.0}; }
  static Strategy unified(double alpha) { return {StrategyKind::kUnified, alpha}; }

  [[nodiscard]] std::string name() const;  // "sc", "sv", "unified"
};

struct SelectionResult {
  std::string question_id;
  std::size_t path_index = 0;
  NormalizedAnswer answer;
  std::vector<PathScore> scores;
  Strategy strategy;
};

/// n_i for every path: how many paths (including i) share path i's final answer.
std::vector<std::size_t> consistency_counts(const PathEnsemble& ensemble);

/// m_i for every path, counting only true verdicts on real (non-pad) steps.
/// Throws DimensionMismatch when verdicts do not cover N paths of M steps each.
std::vector<std::size_t> correct_step_counts(const PathEnsemble& ensemble,
                                             const StepVerdicts& verdicts);

std::vector<PathScore> unified_scores(const PathEnsemble& ensemble, const StepVerdicts& verdicts,
                                      double alpha);

/// path_index of the maximal d; ties resolve to the lowest path_index.
std::size_t select_index(std::span<const PathScore> scores, TieBreak tie_break = TieBreak::kLowestIndex);

SelectionResult select_answer(const PathEnsemble& ensemble, std::vector<PathScore> scores,
                              Strategy strategy, TieBreak tie_break = TieBreak::kLowestIndex);

/// Most frequent final answer; ties go to the lowest path index. Does not consult verdicts.
SelectionResult self_consistency(const PathEnsemble& ensemble);

/// Path with the most verified-correct steps; ties go to the lowest path index.
SelectionResult self_verification(const PathEnsemble& ensemble, const StepVerdicts& verdicts);

SelectionResult calibrate(const PathEnsemble& ensemble, const StepVerdicts* verdicts,
                          const Strategy& strategy);

struct Threshold {
  double value = 1.0;
  bool degenerate = false;
};

/// Largest alpha bound below which the step-level term decides every admissible pair:
/// N / (M (N - 2) + N). For N < 3 no admissible pair exists and {1, degenerate} is returned.
Threshold step_dominance_threshold(std::size_t n_paths, std::size_t max_steps);

/// Bound above which the path-level term decides every admissible pair: N / (N + 1).
/// Throws DegenerateEnsemble for N < 2.
double path_dominance_threshold(std::size_t n_paths);

struct SweepPoint {
  double alpha = 0.0;
  double accuracy = 0.0;
  std::size_t n_questions = 0;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
  Threshold step_threshold;
  std::optional<double> path_threshold;
};

/// Inclusive grid from `start` to `stop` with `step` spacing ("0:1:0.05" has 21 points).
std::vector<double> alpha_grid(double start, double stop, double step);

/// Accuracy of unified calibration at each alpha. verdicts[i] belongs to ensembles[i].
/// Thresholds are computed from the first ensemble's N and M. Throws MissingGold.
SweepCurve alpha_sweep(const std::vector<PathEnsemble>& ensembles,
                       const std::vector<StepVerdicts>& verdicts, const std::vector<double>& alphas,
                       std::size_t workers = 0);

}  // namespace calib
