#include "calib/calibration.hpp"

#include <cmath>
#include <map>

#include "parallel.hpp"

namespace calib {
namespace {

void require_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
}

SelectionResult finish(const PathEnsemble& ensemble, std::vector<PathScore> scores,
                       std::size_t index, Strategy strategy) {
  SelectionResult r;
  r.question_id = ensemble.question_id;
  r.path_index = index;
  r.answer = ensemble.paths.at(index).final_answer;
  r.scores = std::move(scores);
  r.strategy = strategy;
  return r;
}

// Scores carrying d = n/N or m/M, for reporting the endpoint strategies.
std::vector<PathScore> endpoint_scores(const std::vector<std::size_t>& n,
                                       const std::vector<std::size_t>& m, std::size_t n_paths,
                                       std::size_t max_steps, bool path_level) {
  std::vector<PathScore> scores(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    scores[i].path_index = i;
    scores[i].n = n[i];
    scores[i].m = m.empty() ? 0 : m[i];
    scores[i].d = path_level ? static_cast<double>(n[i]) / static_cast<double>(n_paths)
                             : static_cast<double>(scores[i].m) / static_cast<double>(max_steps);
  }
  return scores;
}

}  // namespace

void CalibrationConfig::validate() const {
  require_alpha(alpha);
  if (n_paths < 1) throw Error(ErrorCode::kInvalidArgument, "N must be >= 1");
  if (max_steps < 1) throw Error(ErrorCode::kInvalidArgument, "M must be >= 1");
}

std::string Strategy::name() const {
  switch (kind) {
    case StrategyKind::kSelfConsistency:
      return "sc";
    case StrategyKind::kSelfVerification:
      return "sv";
    case StrategyKind::kUnified:
      return "unified";
  }
  return "unified";
}

std::vector<std::size_t> consistency_counts(const PathEnsemble& ensemble) {
  std::map<std::pair<AnswerKind, std::string>, std::size_t> freq;
  for (const auto& p : ensemble.paths) ++freq[{p.final_answer.kind, p.final_answer.canonical}];
  std::vector<std::size_t> counts;
  counts.reserve(ensemble.paths.size());
  for (const auto& p : ensemble.paths) {
    counts.push_back(freq[{p.final_answer.kind, p.final_answer.canonical}]);
  }
  return counts;
}

std::vector<std::size_t> correct_step_counts(const PathEnsemble& ensemble,
                                             const StepVerdicts& verdicts) {
  const std::size_t n_paths = ensemble.path_count();
  const std::size_t max_steps = ensemble.step_count();
  if (verdicts.per_path.size() != n_paths) {
    throw Error(ErrorCode::kDimensionMismatch,
                "question '" + ensemble.question_id + "': verdicts cover " +
                    std::to_string(verdicts.per_path.size()) + " paths, ensemble has " +
                    std::to_string(n_paths));
  }
  std::vector<std::size_t> m(n_paths, 0);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto& row = verdicts.per_path[i];
    if (row.size() != max_steps) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "question '" + ensemble.question_id + "' path " + std::to_string(i) +
                      ": verdict vector has length " + std::to_string(row.size()) + ", M is " +
                      std::to_string(max_steps));
    }
    const auto& steps = ensemble.paths[i].steps;
    for (std::size_t j = 0; j < max_steps; ++j) {
      if (row[j] && !steps[j].is_pad) ++m[i];
    }
  }
  return m;
}

std::vector<PathScore> unified_scores(const PathEnsemble& ensemble, const StepVerdicts& verdicts,
                                      double alpha) {
  require_alpha(alpha);
  const auto n = consistency_counts(ensemble);
  const auto m = correct_step_counts(ensemble, verdicts);
  const auto n_total = static_cast<double>(ensemble.path_count());
  const auto m_total = static_cast<double>(ensemble.step_count());

  std::vector<PathScore> scores(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    scores[i].path_index = i;
    scores[i].n = n[i];
    scores[i].m = m[i];
    scores[i].d = alpha * (static_cast<double>(n[i]) / n_total) +
                  (1.0 - alpha) * (static_cast<double>(m[i]) / m_total);
  }
  return scores;
}

std::size_t select_index(std::span<const PathScore> scores, TieBreak) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "no scores to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    // Strict comparison keeps the earliest index on ties; scores are in path order.
    if (scores[i].d > scores[best].d ||
        (scores[i].d == scores[best].d && scores[i].path_index < scores[best].path_index)) {
      best = i;
    }
  }
  return scores[best].path_index;
}

SelectionResult select_answer(const PathEnsemble& ensemble, std::vector<PathScore> scores,
                              Strategy strategy, TieBreak tie_break) {
  auto index = select_index(scores, tie_break);
  return finish(ensemble, std::move(scores), index, strategy);
}

SelectionResult self_consistency(const PathEnsemble& ensemble) {
  if (ensemble.paths.empty()) throw Error(ErrorCode::kInvalidArgument, "ensemble has no paths");
  const auto n = consistency_counts(ensemble);
  std::size_t best = 0;
  for (std::size_t i = 1; i < n.size(); ++i) {
    if (n[i] > n[best]) best = i;
  }
  return finish(ensemble,
                endpoint_scores(n, {}, ensemble.path_count(), ensemble.step_count(), true), best,
                Strategy::self_consistency());
}

SelectionResult self_verification(const PathEnsemble& ensemble, const StepVerdicts& verdicts) {
  if (ensemble.paths.empty()) throw Error(ErrorCode::kInvalidArgument, "ensemble has no paths");
  const auto m = correct_step_counts(ensemble, verdicts);
  std::size_t best = 0;
  for (std::size_t i = 1; i < m.size(); ++i) {
    if (m[i] > m[best]) best = i;
  }
  return finish(ensemble,
                endpoint_scores(consistency_counts(ensemble), m, ensemble.path_count(),
                                ensemble.step_count(), false),
                best, Strategy::self_verification());
}

SelectionResult calibrate(const PathEnsemble& ensemble, const StepVerdicts* verdicts,
                          const Strategy& strategy) {
  switch (strategy.kind) {
    case StrategyKind::kSelfConsistency:
      return self_consistency(ensemble);
    case StrategyKind::kSelfVerification:
      if (!verdicts) throw Error(ErrorCode::kOracleMissing, "no verdicts for '" + ensemble.question_id + "'");
      return self_verification(ensemble, *verdicts);
    case StrategyKind::kUnified:
      if (!verdicts) throw Error(ErrorCode::kOracleMissing, "no verdicts for '" + ensemble.question_id + "'");
      return select_answer(ensemble, unified_scores(ensemble, *verdicts, strategy.alpha), strategy);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy");
}

Threshold step_dominance_threshold(std::size_t n_paths, std::size_t max_steps) {
  if (max_steps < 1) throw Error(ErrorCode::kInvalidArgument, "M must be >= 1");
  if (n_paths < 3) return {1.0, true};
  const auto n = static_cast<double>(n_paths);
  const auto m = static_cast<double>(max_steps);
  return {n / (m * (n - 2.0) + n), false};
}

double path_dominance_threshold(std::size_t n_paths) {
  if (n_paths < 2) {
    throw Error(ErrorCode::kDegenerateEnsemble, "path-level dominance needs N >= 2");
  }
  const auto n = static_cast<double>(n_paths);
  return n / (n + 1.0);
}

std::vector<double> alpha_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs step > 0 and stop >= start");
  }
  // Points are start + k*step so that accumulated rounding never drops the endpoint.
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    // Snap to 1e-12 so "0:1:0.05" yields 0.15 rather than 0.15000000000000002.
    double a = std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12;
    grid.push_back(std::min(stop, a));
  }
  return grid;
}

SweepCurve alpha_sweep(const std::vector<PathEnsemble>& ensembles,
                       const std::vector<StepVerdicts>& verdicts, const std::vector<double>& alphas,
                       std::size_t workers) {
  if (verdicts.size() != ensembles.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one verdict table per ensemble is required");
  }
  for (const auto& e : ensembles) {
    if (!e.gold_answer) {
      throw Error(ErrorCode::kMissingGold, "question '" + e.question_id + "' has no gold answer");
    }
  }
  for (double a : alphas) require_alpha(a);

  SweepCurve curve;
  curve.points.resize(alphas.size());
  detail::parallel_for(alphas.size(), workers, [&](std::size_t k) {
    std::size_t correct = 0;
    for (std::size_t q = 0; q < ensembles.size(); ++q) {
      auto sel = select_answer(ensembles[q], unified_scores(ensembles[q], verdicts[q], alphas[k]),
                               Strategy::unified(alphas[k]));
      if (sel.answer == *ensembles[q].gold_answer) ++correct;
    }
    curve.points[k] = {alphas[k],
                       ensembles.empty() ? 0.0
                                         : static_cast<double>(correct) /
                                               static_cast<double>(ensembles.size()),
                       ensembles.size()};
  });

  if (!ensembles.empty()) {
    const auto n = ensembles.front().path_count();
    curve.step_threshold = step_dominance_threshold(n, ensembles.front().step_count());
    if (n >= 2) curve.path_threshold = path_dominance_threshold(n);
  }
  return curve;
}

}  // namespace calib
