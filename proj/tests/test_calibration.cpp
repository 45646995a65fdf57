#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "calib/calibration.hpp"
#include "oracles.hpp"

namespace calib {
namespace {

PathEnsemble make_ensemble(const std::vector<std::string>& raw_answers, std::size_t m_steps = 3,
                           std::optional<std::string> gold = std::nullopt) {
  PathEnsemble e;
  e.question_id = "q";
  e.question = "?";
  for (const auto& a : raw_answers) {
    std::vector<std::string> steps(m_steps, "s");
    e.paths.push_back(shape_path(steps, normalize_answer(a, AnswerKind::kNumeric), m_steps));
  }
  if (gold) e.gold_answer = normalize_answer(*gold, AnswerKind::kNumeric);
  return e;
}

StepVerdicts make_verdicts(std::vector<std::vector<bool>> rows) {
  StepVerdicts v;
  v.question_id = "q";
  v.per_path = std::move(rows);
  return v;
}

std::vector<PathScore> scores_from(const std::vector<double>& d) {
  std::vector<PathScore> s;
  for (std::size_t i = 0; i < d.size(); ++i) s.push_back({i, 1, 0, d[i]});
  return s;
}

TEST(ConsistencyCounts, Examples) {
  EXPECT_EQ(consistency_counts(make_ensemble({"39", "39", "42"})), (std::vector<std::size_t>{2, 2, 1}));
  EXPECT_EQ(consistency_counts(make_ensemble({"5", "5", "5", "5"})), (std::vector<std::size_t>{4, 4, 4, 4}));
  EXPECT_EQ(consistency_counts(make_ensemble({"39", "39.0", "42"})), (std::vector<std::size_t>{2, 2, 1}));
}

TEST(UnifiedScores, HandArithmetic) {
  // Paths 0..5 share "1", paths 6..9 differ; path 0 has two verified steps.
  std::vector<std::string> answers = {"1", "1", "1", "1", "1", "1", "2", "3", "4", "5"};
  auto e = make_ensemble(answers);
  std::vector<std::vector<bool>> rows(10, std::vector<bool>(3, false));
  rows[0] = {true, true, false};
  auto s = unified_scores(e, make_verdicts(rows), 0.5);
  EXPECT_EQ(s[0].n, 6u);
  EXPECT_EQ(s[0].m, 2u);
  EXPECT_NEAR(s[0].d, 0.5 * 0.6 + 0.5 * (2.0 / 3.0), 1e-15);
  EXPECT_NEAR(s[0].d, 0.6333333333333333, 1e-15);
}

TEST(UnifiedScores, Endpoints) {
  std::mt19937_64 rng(3);
  auto c = testing::random_case(rng, 7, 3);
  auto at1 = unified_scores(c.ensemble, c.verdicts, 1.0);
  auto at0 = unified_scores(c.ensemble, c.verdicts, 0.0);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(at1[i].d, static_cast<double>(at1[i].n) / 7.0);
    EXPECT_EQ(at0[i].d, static_cast<double>(at0[i].m) / 3.0);
  }
}

TEST(UnifiedScores, PadVerdictsDoNotCount) {
  PathEnsemble e;
  e.question_id = "q";
  e.paths.push_back(shape_path({"only step"}, {AnswerKind::kNumeric, "1"}, 3));
  auto m = correct_step_counts(e, make_verdicts({{true, true, true}}));
  EXPECT_EQ(m[0], 1u);
}

TEST(UnifiedScores, DimensionMismatch) {
  auto e = make_ensemble({"1", "2"});
  EXPECT_THROW(unified_scores(e, make_verdicts({{true, false, true}}), 0.5), Error);
  EXPECT_THROW(unified_scores(e, make_verdicts({{true}, {false}}), 0.5), Error);
}

TEST(UnifiedScores, BoundedAndMonotone) {
  for (std::size_t N = 1; N <= 12; ++N) {
    for (std::size_t M = 1; M <= 6; ++M) {
      for (int a = 0; a <= 20; ++a) {
        const double alpha = a / 20.0;
        for (std::size_t n = 1; n <= N; ++n) {
          for (std::size_t m = 0; m <= M; ++m) {
            const double d = alpha * (static_cast<double>(n) / N) + (1 - alpha) * (static_cast<double>(m) / M);
            ASSERT_GE(d, 0.0);
            ASSERT_LE(d, 1.0);
            const long double here = testing::unified_oracle(n, m, N, M, alpha);
            if (alpha > 0 && n < N) ASSERT_LT(here, testing::unified_oracle(n + 1, m, N, M, alpha));
            if (alpha < 1 && m < M) ASSERT_LT(here, testing::unified_oracle(n, m + 1, N, M, alpha));
          }
        }
      }
    }
  }
}

TEST(SelectIndex, ArgmaxAndTies) {
  EXPECT_EQ(select_index(scores_from({0.2, 0.9, 0.5})), 1u);
  EXPECT_EQ(select_index(scores_from({0.7, 0.7})), 0u);
}

TEST(SelectIndex, ScaleInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> d(8);
    for (auto& x : d) x = std::round(u(rng) * 10) / 10;
    auto base = select_index(scores_from(d));
    for (double k : {0.5, 2.0, 8.0}) {
      std::vector<double> scaled = d;
      for (auto& x : scaled) x *= k;
      EXPECT_EQ(select_index(scores_from(scaled)), base);
    }
  }
}

TEST(SelectIndex, PermutationEquivariant) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> u(0, 4);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> d(6);
    for (auto& x : d) x = u(rng) / 4.0;
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> permuted(6);
    for (std::size_t i = 0; i < 6; ++i) permuted[perm[i]] = d[i];
    const auto chosen = select_index(scores_from(permuted));
    const double best = *std::max_element(d.begin(), d.end());
    EXPECT_EQ(permuted[chosen], best);
    for (std::size_t i = 0; i < chosen; ++i) EXPECT_LT(permuted[i], best);
  }
}

TEST(SelfConsistency, Examples) {
  EXPECT_EQ(self_consistency(make_ensemble({"39", "39", "42"})).answer.canonical, "39");
  auto distinct = self_consistency(make_ensemble({"1", "2", "3"}));
  EXPECT_EQ(distinct.path_index, 0u);
  EXPECT_EQ(distinct.answer.canonical, "1");
  auto six = self_consistency(make_ensemble({"3", "7", "7", "1", "7", "7", "2", "7", "7", "3"}));
  EXPECT_EQ(six.answer.canonical, "7");
  EXPECT_EQ(six.path_index, 1u);
}

TEST(SelfVerification, Examples) {
  auto e = make_ensemble({"1", "2", "3"});
  EXPECT_EQ(self_verification(e, make_verdicts({{true, true, false}, {true, false, false}, {true, true, true}}))
                .path_index,
            2u);
  EXPECT_EQ(self_verification(e, make_verdicts(std::vector<std::vector<bool>>(3, {false, false, false})))
                .path_index,
            0u);
}

TEST(SelfVerification, RandomTablesMatchBruteForce) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 500; ++t) {
    auto c = testing::random_case(rng, 10, 3);
    EXPECT_EQ(self_verification(c.ensemble, c.verdicts).path_index,
              testing::most_verified_oracle(c.verdicts));
  }
}

TEST(Calibrate, EndpointEquivalence) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> n_d(1, 12), m_d(1, 6);
  for (int t = 0; t < 2000; ++t) {
    auto c = testing::random_case(rng, n_d(rng), m_d(rng));
    auto sc = self_consistency(c.ensemble);
    auto u1 = calibrate(c.ensemble, &c.verdicts, Strategy::unified(1.0));
    ASSERT_EQ(sc.path_index, u1.path_index);
    ASSERT_EQ(sc.path_index, testing::majority_oracle(c.ensemble));
    auto sv = self_verification(c.ensemble, c.verdicts);
    auto u0 = calibrate(c.ensemble, &c.verdicts, Strategy::unified(0.0));
    ASSERT_EQ(sv.path_index, u0.path_index);
    ASSERT_EQ(sv.answer, u0.answer);
  }
}

TEST(Calibrate, MissingVerdicts) {
  auto e = make_ensemble({"1", "2"});
  EXPECT_NO_THROW(calibrate(e, nullptr, Strategy::self_consistency()));
  try {
    calibrate(e, nullptr, Strategy::unified(0.5));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kOracleMissing);
  }
}

TEST(Thresholds, StepValues) {
  EXPECT_NEAR(step_dominance_threshold(10, 3).value, 10.0 / 34.0, 1e-15);
  EXPECT_EQ(step_dominance_threshold(4, 2).value, 0.5);
  EXPECT_EQ(step_dominance_threshold(3, 1).value, 0.75);
  auto degenerate = step_dominance_threshold(2, 3);
  EXPECT_TRUE(degenerate.degenerate);
  EXPECT_EQ(degenerate.value, 1.0);
}

TEST(Thresholds, PathValues) {
  EXPECT_NEAR(path_dominance_threshold(10), 10.0 / 11.0, 1e-15);
  EXPECT_EQ(path_dominance_threshold(3), 0.75);
  EXPECT_EQ(path_dominance_threshold(4), 0.8);
  EXPECT_THROW(path_dominance_threshold(1), Error);
}

TEST(AlphaGrid, DefaultHas21Points) {
  auto g = alpha_grid(0.0, 1.0, 0.05);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g[6], 0.3);
  EXPECT_EQ(g.back(), 1.0);
}

TEST(AlphaSweep, ConstructedEnsembles) {
  // Majority "5" is gold: SC is right.
  auto majority_right = make_ensemble({"5", "5", "7"}, 3, "5");
  auto v1 = make_verdicts({{false, false, false}, {false, false, false}, {true, true, true}});
  auto curve = alpha_sweep({majority_right}, {v1}, {1.0});
  EXPECT_EQ(curve.points[0].accuracy, 1.0);

  // The best-verified path holds gold but the majority does not.
  auto verified_right = make_ensemble({"5", "5", "7"}, 3, "7");
  auto both = alpha_sweep({verified_right}, {v1}, {0.0, 1.0});
  EXPECT_EQ(both.points[0].accuracy, 1.0);
  EXPECT_EQ(both.points[1].accuracy, 0.0);
  EXPECT_EQ(both.step_threshold.value, 0.5);
  ASSERT_TRUE(both.path_threshold);
  EXPECT_EQ(*both.path_threshold, 0.75);
}

TEST(AlphaSweep, MatchesPerAlphaRecomputation) {
  std::mt19937_64 rng(42);
  std::vector<PathEnsemble> es;
  std::vector<StepVerdicts> vs;
  for (int q = 0; q < 200; ++q) {
    auto c = testing::random_case(rng, 10, 3, "q" + std::to_string(q));
    c.ensemble.gold_answer = c.ensemble.paths[q % 10].final_answer;
    es.push_back(c.ensemble);
    vs.push_back(c.verdicts);
  }
  auto grid = alpha_grid(0, 1, 0.05);
  auto curve = alpha_sweep(es, vs, grid, 2);
  ASSERT_EQ(curve.points.size(), grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::size_t correct = 0;
    for (std::size_t q = 0; q < es.size(); ++q) {
      auto s = unified_scores(es[q], vs[q], grid[g]);
      std::size_t best = 0;
      for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i].d > s[best].d) best = i;
      }
      if (es[q].paths[best].final_answer == *es[q].gold_answer) ++correct;
    }
    EXPECT_EQ(curve.points[g].accuracy, static_cast<double>(correct) / es.size()) << grid[g];
  }
}

TEST(AlphaSweep, MissingGold) {
  auto e = make_ensemble({"1"});
  EXPECT_THROW(alpha_sweep({e}, {make_verdicts({{true, true, true}})}, {0.5}), Error);
}

TEST(CalibrationConfig, Validate) {
  CalibrationConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace calib
