#pragma once

// Second implementations used as test oracles. Kept deliberately plain: no shared code with
// the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "calib/ensemble.hpp"
#include "calib/roscoe.hpp"
#include "calib/verdicts.hpp"

namespace calib::testing {

struct RandomCase {
  PathEnsemble ensemble;
  StepVerdicts verdicts;
};

// Small answer alphabets so that answers collide and ties happen often.
inline RandomCase random_case(std::mt19937_64& rng, std::size_t n_paths, std::size_t max_steps,
                              const std::string& id = "q") {
  std::uniform_int_distribution<int> answer_dist(0, static_cast<int>(std::max<std::size_t>(1, n_paths / 3)));
  std::uniform_int_distribution<std::size_t> steps_dist(1, max_steps + 1);
  std::bernoulli_distribution coin(0.5);

  RandomCase c;
  c.ensemble.question_id = id;
  c.ensemble.question = "random question " + id;
  c.ensemble.answer_kind = AnswerKind::kNumeric;
  c.ensemble.gold_answer = NormalizedAnswer{AnswerKind::kNumeric, "0"};
  c.verdicts.question_id = id;
  c.verdicts.source = VerdictSourceKind::kSynthetic;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const std::size_t real = steps_dist(rng);
    std::vector<std::string> texts;
    for (std::size_t s = 0; s < real; ++s) texts.push_back("step " + std::to_string(s + 1));
    NormalizedAnswer final_answer{AnswerKind::kNumeric, std::to_string(answer_dist(rng))};
    c.ensemble.paths.push_back(shape_path(texts, final_answer, max_steps));
    std::vector<bool> row;
    for (std::size_t s = 0; s < max_steps; ++s) {
      const bool pad = c.ensemble.paths.back().steps[s].is_pad;
      row.push_back(!pad && coin(rng));
    }
    c.verdicts.per_path.push_back(row);
  }
  return c;
}

// Unified score written as one fraction over the common denominator N*M.
inline long double unified_oracle(std::size_t n, std::size_t m, std::size_t N, std::size_t M,
                                  long double alpha) {
  const long double num = alpha * static_cast<long double>(n) * static_cast<long double>(M) +
                          (1.0L - alpha) * static_cast<long double>(m) * static_cast<long double>(N);
  return num / (static_cast<long double>(N) * static_cast<long double>(M));
}

// Majority answer by counting into a map keyed by answer, first occurrence wins ties.
inline std::size_t majority_oracle(const PathEnsemble& e) {
  std::map<std::string, std::size_t> counts;
  for (const auto& p : e.paths) ++counts[p.final_answer.canonical];
  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < e.paths.size(); ++i) {
    const std::size_t c = counts[e.paths[i].final_answer.canonical];
    if (c > best_count) {
      best = i;
      best_count = c;
    }
  }
  return best;
}

inline std::size_t most_verified_oracle(const StepVerdicts& v) {
  std::size_t best = 0;
  long best_count = -1;
  for (std::size_t i = 0; i < v.per_path.size(); ++i) {
    const long c = std::count(v.per_path[i].begin(), v.per_path[i].end(), true);
    if (c > best_count) {
      best = i;
      best_count = c;
    }
  }
  return best;
}

namespace naive {

inline long double norm(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += static_cast<long double>(x) * x;
  return std::sqrt(s);
}

inline long double cos_sim(const std::vector<double>& a, const std::vector<double>& b) {
  const long double na = norm(a);
  const long double nb = norm(b);
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] / na) * (b[i] / nb);
  return std::clamp(s, -1.0L, 1.0L);
}

inline std::size_t real(const roscoe::ScoreSidecar& s) {
  return s.real_step_count ? *s.real_step_count : s.step_embeddings.size();
}

inline double faithfulness(const roscoe::ScoreSidecar& s) {
  long double total = 0;
  for (std::size_t i = 0; i < real(s); ++i) {
    std::vector<long double> sims;
    for (const auto& src : s.source_step_embeddings) sims.push_back(cos_sim(s.step_embeddings[i], src));
    total += (1 + *std::max_element(sims.begin(), sims.end())) / 2;
  }
  return static_cast<double>(total / real(s));
}

inline double informativeness(const roscoe::ScoreSidecar& s) {
  return static_cast<double>((1 + cos_sim(s.path_embedding, s.source_embedding)) / 2);
}

inline double consistency_steps(const roscoe::ScoreSidecar& s) {
  std::vector<double> pairs{0.0};
  for (std::size_t i = 0; i < real(s); ++i) {
    for (std::size_t j = 0; j < i; ++j) pairs.push_back(s.contradiction_within[i][j]);
  }
  return 1.0 - *std::max_element(pairs.begin(), pairs.end());
}

inline double consistency_path(const roscoe::ScoreSidecar& s) {
  std::vector<double> all;
  for (std::size_t i = 0; i < real(s); ++i) {
    all.insert(all.end(), s.contradiction_vs_source[i].begin(), s.contradiction_vs_source[i].end());
  }
  return 1.0 - *std::max_element(all.begin(), all.end());
}

inline double perplexity(const std::vector<double>& lp) {
  long double mean = 0;
  for (double x : lp) mean += x;
  mean /= lp.size();
  const long double ppl = std::exp(-mean);
  return static_cast<double>(1.0L / ppl);
}

}  // namespace naive

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n = 0.0;
  do {
    n = 0.0;
    for (auto& x : v) {
      x = g(rng);
      n += x * x;
    }
  } while (n < 1e-12);
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
  return v;
}

inline roscoe::ScoreSidecar random_sidecar(std::mt19937_64& rng, std::size_t index = 0) {
  std::uniform_int_distribution<std::size_t> dim_d(2, 16);
  std::uniform_int_distribution<std::size_t> steps_d(1, 6);
  std::uniform_int_distribution<std::size_t> src_d(1, 5);
  std::uniform_int_distribution<std::size_t> tok_d(1, 40);
  std::uniform_real_distribution<double> p(0.0, 1.0);
  std::uniform_real_distribution<double> lp(-6.0, 0.0);

  roscoe::ScoreSidecar s;
  s.question_id = "rand-" + std::to_string(index);
  const std::size_t dim = dim_d(rng);
  const std::size_t h = steps_d(rng);
  const std::size_t t = src_d(rng);
  for (std::size_t i = 0; i < h; ++i) s.step_embeddings.push_back(random_unit(rng, dim));
  for (std::size_t j = 0; j < t; ++j) s.source_step_embeddings.push_back(random_unit(rng, dim));
  s.path_embedding = random_unit(rng, dim);
  s.source_embedding = random_unit(rng, dim);
  s.contradiction_within.assign(h, std::vector<double>(h, 0.0));
  for (auto& row : s.contradiction_within) {
    for (auto& x : row) x = p(rng);
  }
  s.contradiction_vs_source.assign(h, std::vector<double>(t, 0.0));
  for (auto& row : s.contradiction_vs_source) {
    for (auto& x : row) x = p(rng);
  }
  const std::size_t tokens = tok_d(rng);
  for (std::size_t k = 0; k < tokens; ++k) s.token_logprobs.push_back(lp(rng));
  if (h > 1 && p(rng) < 0.3) s.real_step_count = h - 1;
  return s;
}

}  // namespace calib::testing
