#include "calib/synth.hpp"

#include <cmath>
#include <random>
#include <string>

#include "parallel.hpp"

namespace calib::synth {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform draw in [0, 1) built from the raw 64-bit engine output, so the stream does not
// depend on the standard library's distribution implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must lie in [0, 1]");
  }
}

AccuracyEstimate estimate(std::size_t correct, std::size_t trials) {
  AccuracyEstimate e;
  e.trials = trials;
  if (trials == 0) return e;
  e.accuracy = static_cast<double>(correct) / static_cast<double>(trials);
  e.standard_error = std::sqrt(e.accuracy * (1.0 - e.accuracy) / static_cast<double>(trials));
  return e;
}

std::vector<GeneratedQuestion> generate_batch(const SynthSpec& spec, std::size_t trials,
                                              std::size_t workers) {
  std::vector<GeneratedQuestion> batch(trials);
  detail::parallel_for(trials, workers,
                       [&](std::size_t i) { batch[i] = generate_ensemble(spec, i); });
  return batch;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_paths < 1) throw Error(ErrorCode::kInvalidArgument, "N must be >= 1");
  if (max_steps < 1) throw Error(ErrorCode::kInvalidArgument, "M must be >= 1");
  require_probability(p_final_correct, "p_final_correct");
  require_probability(p_step_correct_given_final, "p_step_correct_given_final");
  require_probability(p_step_correct_given_wrong, "p_step_correct_given_wrong");
}

GeneratedQuestion generate_ensemble(const SynthSpec& spec, std::size_t index) {
  spec.validate();
  std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(index))));

  GeneratedQuestion q;
  auto& e = q.ensemble;
  e.question_id = "synth-" + std::to_string(spec.seed) + "-" + std::to_string(index);
  e.question = "Synthetic question " + std::to_string(index);
  e.answer_kind = AnswerKind::kFreeform;
  e.gold_answer = NormalizedAnswer{AnswerKind::kFreeform, kGoldAnswer};
  q.verdicts.question_id = e.question_id;
  q.verdicts.source = VerdictSourceKind::kSynthetic;

  for (std::size_t i = 0; i < spec.n_paths; ++i) {
    const bool correct = unit(rng) < spec.p_final_correct;
    std::string answer = kGoldAnswer;
    if (!correct) {
      answer = spec.distractor_count == 0
                   ? "x" + std::to_string(i + 1)
                   : "w" + std::to_string(1 + static_cast<std::size_t>(
                                                  unit(rng) * static_cast<double>(spec.distractor_count)));
    }
    const double p_step = correct ? spec.p_step_correct_given_final : spec.p_step_correct_given_wrong;

    std::vector<std::string> steps;
    std::vector<bool> verdict_row;
    std::string raw;
    for (std::size_t j = 0; j < spec.max_steps; ++j) {
      steps.push_back("Step " + std::to_string(j + 1) + " of path " + std::to_string(i + 1) + ".");
      verdict_row.push_back(unit(rng) < p_step);
      raw += steps.back() + " ";
    }
    raw += "The answer is " + answer + ".";
    e.paths.push_back(shape_path(steps, NormalizedAnswer{AnswerKind::kFreeform, answer},
                                 spec.max_steps, {}, raw));
    q.verdicts.per_path.push_back(std::move(verdict_row));
  }
  return q;
}

AccuracyEstimate simulate_accuracy(const SynthSpec& spec, const Strategy& strategy,
                                   std::size_t trials, std::size_t workers) {
  spec.validate();
  std::vector<char> hit(trials, 0);
  detail::parallel_for(trials, workers, [&](std::size_t i) {
    auto q = generate_ensemble(spec, i);
    auto sel = calibrate(q.ensemble, &q.verdicts, strategy);
    hit[i] = sel.answer == *q.ensemble.gold_answer ? 1 : 0;
  });
  std::size_t correct = 0;
  for (char h : hit) correct += static_cast<std::size_t>(h);
  return estimate(correct, trials);
}

AlphaSearch brute_force_best_alpha(const SynthSpec& spec, const std::vector<double>& grid,
                                   std::size_t trials, std::size_t workers) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "alpha grid is empty");
  spec.validate();
  const auto batch = generate_batch(spec, trials, workers);

  AlphaSearch search;
  search.curve.resize(grid.size());
  detail::parallel_for(grid.size(), workers, [&](std::size_t k) {
    std::size_t correct = 0;
    for (const auto& q : batch) {
      auto sel = calibrate(q.ensemble, &q.verdicts, Strategy::unified(grid[k]));
      if (sel.answer == *q.ensemble.gold_answer) ++correct;
    }
    search.curve[k] = {grid[k], estimate(correct, trials)};
  });

  std::size_t best = 0;
  for (std::size_t k = 1; k < search.curve.size(); ++k) {
    const auto& [alpha, est] = search.curve[k];
    const auto& [best_alpha, best_est] = search.curve[best];
    if (est.accuracy > best_est.accuracy ||
        (est.accuracy == best_est.accuracy && alpha < best_alpha)) {
      best = k;
    }
  }
  search.best_alpha = search.curve[best].first;
  return search;
}

}  // namespace calib::synth
