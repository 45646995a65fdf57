#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "calib/calibration.hpp"
#include "calib/ensemble.hpp"
#include "calib/verdicts.hpp"

namespace calib::synth {

/// Generative model: each path is independently correct with p_final_correct; wrong paths
/// pick uniformly among distractors "w1".."wk"; each step verdict is an independent draw
/// whose success probability depends only on whether the path is correct.
struct SynthSpec {
  std::size_t n_paths = 10;
  std::size_t max_steps = 3;
  double p_final_correct = 0.5;
  double p_step_correct_given_final = 0.8;
  double p_step_correct_given_wrong = 0.3;
  std::size_t distractor_count = 3;
  std::uint64_t seed = 42;
  std::size_t questions = 100;

  void validate() const;
  /// False when step verdicts are less likely on correct paths than on wrong ones.
  [[nodiscard]] bool informative_signal() const {
    return p_step_correct_given_final >= p_step_correct_given_wrong;
  }
};

inline constexpr const char* kGoldAnswer = "gold";

struct GeneratedQuestion {
  PathEnsemble ensemble;
  StepVerdicts verdicts;
};

/// Deterministic in (spec.seed, index) and independent of any other index.
GeneratedQuestion generate_ensemble(const SynthSpec& spec, std::size_t index);

struct AccuracyEstimate {
  double accuracy = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

/// Mean correctness of `strategy` over questions 0..trials-1.
AccuracyEstimate simulate_accuracy(const SynthSpec& spec, const Strategy& strategy,
                                   std::size_t trials, std::size_t workers = 0);

struct AlphaSearch {
  double best_alpha = 0.0;
  std::vector<std::pair<double, AccuracyEstimate>> curve;
};

/// Evaluates every grid point on one shared stream of generated questions and returns the
/// most accurate alpha; ties go to the smaller alpha.
AlphaSearch brute_force_best_alpha(const SynthSpec& spec, const std::vector<double>& grid,
                                   std::size_t trials, std::size_t workers = 0);

}  // namespace calib::synth
