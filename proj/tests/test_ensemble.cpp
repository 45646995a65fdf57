#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "calib/answer.hpp"
#include "calib/ensemble.hpp"

namespace calib {
namespace {

NormalizedAnswer num(const std::string& s) { return {AnswerKind::kNumeric, s}; }

TEST(NormalizeAnswer, NumericStripsCurrencyCommasAndTrailingZeros) {
  EXPECT_EQ(normalize_answer("$1,200.00", AnswerKind::kNumeric), num("1200"));
  EXPECT_EQ(normalize_answer("39.0", AnswerKind::kNumeric), num("39"));
  EXPECT_EQ(normalize_answer("007", AnswerKind::kNumeric), num("7"));
  EXPECT_EQ(normalize_answer("-0.50", AnswerKind::kNumeric), num("-0.5"));
  EXPECT_EQ(normalize_answer(".25", AnswerKind::kNumeric), num("0.25"));
  EXPECT_EQ(normalize_answer("-0", AnswerKind::kNumeric), num("0"));
}

TEST(NormalizeAnswer, ChoiceFoldsCaseAndBrackets) {
  EXPECT_EQ(normalize_answer("(B)", AnswerKind::kChoice), (NormalizedAnswer{AnswerKind::kChoice, "b"}));
  EXPECT_EQ(normalize_answer("Answer: (C)", AnswerKind::kChoice).canonical, "c");
}

TEST(NormalizeAnswer, FreeformCollapsesWhitespace) {
  EXPECT_EQ(normalize_answer("  New   York. ", AnswerKind::kFreeform).canonical, "new york");
}

TEST(NormalizeAnswer, Errors) {
  try {
    normalize_answer("no digits", AnswerKind::kNumeric);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnparseableAnswer);
  }
  EXPECT_THROW(normalize_answer("   ", AnswerKind::kFreeform), Error);
}

TEST(NormalizeAnswer, IdempotentOnRandomInputs) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "0123456789.,-$ ab()";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(1, 12);
  int checked = 0;
  for (int i = 0; i < 5000; ++i) {
    std::string raw;
    for (int k = len(rng); k > 0; --k) raw += alphabet[pick(rng)];
    for (auto kind : {AnswerKind::kNumeric, AnswerKind::kChoice, AnswerKind::kFreeform}) {
      NormalizedAnswer once;
      try {
        once = normalize_answer(raw, kind);
      } catch (const Error&) {
        continue;
      }
      EXPECT_EQ(normalize_answer(once.canonical, kind), once) << '"' << raw << '"';
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(ExtractFinalAnswer, PaperAppendixExample) {
  auto a = extract_final_answer(
      "Tom had 74 pieces and gave away 35. 74 - 35 = 39 pieces left. The answer is 39.",
      AnswerKind::kNumeric);
  ASSERT_TRUE(a);
  EXPECT_EQ(*a, num("39"));
}

TEST(ExtractFinalAnswer, LastCueWins) {
  EXPECT_EQ(extract_final_answer("The answer is 21. Wait, the answer is 50.", AnswerKind::kNumeric),
            num("50"));
}

TEST(ExtractFinalAnswer, AbsentWithoutCandidate) {
  EXPECT_FALSE(extract_final_answer("no numbers here", AnswerKind::kNumeric));
}

TEST(SegmentSteps, Markers) {
  EXPECT_EQ(segment_steps("Step 1: add. Step 2: subtract."),
            (std::vector<std::string>{"add.", "subtract."}));
}

TEST(SegmentSteps, Sentences) {
  EXPECT_EQ(segment_steps("A. B. C."), (std::vector<std::string>{"A.", "B.", "C."}));
  EXPECT_EQ(segment_steps("just one line"), (std::vector<std::string>{"just one line"}));
}

TEST(ShapePath, TruncatesKeepingFinalAnswer) {
  auto p = shape_path({"a", "b", "c", "d", "e"}, num("7"), 3);
  ASSERT_EQ(p.steps.size(), 3u);
  EXPECT_EQ(p.steps[2].text, "c");
  EXPECT_EQ(p.true_step_count, 5u);
  EXPECT_EQ(p.real_step_count(), 3u);
  EXPECT_EQ(p.final_answer, num("7"));
}

TEST(ShapePath, PadsTail) {
  auto p = shape_path({"a", "b"}, num("7"), 3);
  ASSERT_EQ(p.steps.size(), 3u);
  EXPECT_FALSE(p.steps[1].is_pad);
  EXPECT_TRUE(p.steps[2].is_pad);
  EXPECT_TRUE(p.steps[2].text.empty());
  EXPECT_FALSE(p.steps[2].answer);
  EXPECT_EQ(p.real_step_count(), 2u);
}

TEST(ShapePath, ExactFitUnchanged) {
  auto p = shape_path({"a", "b", "c"}, num("1"), 3);
  EXPECT_EQ(p.real_step_count(), 3u);
  EXPECT_EQ(p.true_step_count, 3u);
}

TEST(ShapePath, ShapeInvariantForAllSizes) {
  for (std::size_t m = 1; m <= 6; ++m) {
    for (std::size_t k = 1; k <= 8; ++k) {
      std::vector<std::string> texts(k, "s");
      auto p = shape_path(texts, num("1"), m);
      ASSERT_EQ(p.steps.size(), m);
      bool seen_pad = false;
      for (std::size_t i = 0; i < m; ++i) {
        EXPECT_EQ(p.steps[i].index, i + 1);
        if (seen_pad) EXPECT_TRUE(p.steps[i].is_pad);
        seen_pad = seen_pad || p.steps[i].is_pad;
      }
    }
  }
}

TEST(ShapePath, RejectsEmpty) { EXPECT_THROW(shape_path({}, num("1"), 3), Error); }

TEST(LoadEnsembles, TwoLines) {
  std::istringstream in(
      R"({"question_id":"a","question":"q","answer_kind":"numeric","paths":[{"raw_text":"1 + 1 = 2. The answer is 2."}]})"
      "\n"
      R"({"question_id":"b","question":"q","answer_kind":"numeric","paths":[{"raw_text":"x is 3","steps":["x is 3"],"final_answer":"3"}]})"
      "\n");
  auto r = load_ensembles(in, {});
  ASSERT_EQ(r.ensembles.size(), 2u);
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_EQ(r.ensembles[0].paths[0].final_answer, num("2"));
  EXPECT_EQ(r.ensembles[1].step_count(), 3u);
}

TEST(LoadEnsembles, MissingPathsIsDiagnostic) {
  std::istringstream in(R"({"question_id":"a","question":"q","answer_kind":"numeric"})" "\n");
  auto r = load_ensembles(in, {});
  EXPECT_TRUE(r.ensembles.empty());
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].line, 1u);
}

TEST(LoadEnsembles, AdversarialRecordsNeverBreakInvariants) {
  const char* lines[] = {
      "not json",
      "[]",
      R"({"question_id":5})",
      R"({"question_id":"a","question":"q","answer_kind":"numeric","paths":[]})",
      R"({"question_id":"b","question":"q","answer_kind":"weird","paths":[{"raw_text":"r","steps":["1"],"final_answer":"1"}]})",
      R"({"question_id":"c","question":"q","answer_kind":"numeric","paths":[{"raw_text":"r","steps":[],"final_answer":"1"}]})",
      R"({"question_id":"d","question":"q","answer_kind":"numeric","paths":[{"raw_text":"r","steps":["a","b","c","d","e"],"final_answer":"$3.50"}]})",
      R"({"question_id":"d","question":"q","answer_kind":"numeric","paths":[{"raw_text":"r","steps":["a"],"final_answer":"1"}]})",
      R"({"question_id":"e","question":"q","answer_kind":"numeric","paths":[{"raw_text":"r","steps":["a"],"step_answers":["1","2"],"final_answer":"1"}]})",
      R"({"question_id":"f","question":"q","answer_kind":"numeric","paths":[{"raw_text":"r","steps":["a"],"final_answer":"none"}]})",
  };
  std::string all;
  for (const char* l : lines) all += std::string(l) + "\n";
  std::istringstream in(all);
  auto r = load_ensembles(in, {});
  ASSERT_EQ(r.ensembles.size(), 1u);
  EXPECT_EQ(r.ensembles[0].question_id, "d");
  EXPECT_EQ(r.ensembles[0].paths[0].final_answer, num("3.5"));
  EXPECT_EQ(r.ensembles[0].paths[0].true_step_count, 5u);
  EXPECT_EQ(r.diagnostics.size(), 9u);
}

TEST(LoadEnsembles, PaperConfigShape) {
  std::ostringstream file;
  for (int q = 0; q < 3; ++q) {
    file << R"({"question_id":"q)" << q << R"(","question":"?","answer_kind":"numeric","paths":[)";
    for (int i = 0; i < 10; ++i) {
      if (i) file << ',';
      file << R"({"raw_text":"Step 1: 2 + 2 = 4. Step 2: 4 * 2 = 8. The answer is 8."})";
    }
    file << "]}\n";
  }
  std::istringstream in(file.str());
  LoadOptions opts;
  opts.max_steps = 3;
  opts.expected_paths = 10;
  auto r = load_ensembles(in, opts);
  ASSERT_EQ(r.ensembles.size(), 3u);
  for (const auto& e : r.ensembles) {
    EXPECT_EQ(e.path_count(), 10u);
    for (const auto& p : e.paths) EXPECT_EQ(p.steps.size(), 3u);
  }
}

TEST(LoadEnsembles, RoundTrip) {
  std::istringstream in(
      R"({"question_id":"a","question":"q","answer_kind":"numeric","gold_answer":"8","paths":[{"raw_text":"r","steps":["2 + 2 = 4","4 * 2 = 8"],"final_answer":"8"}]})"
      "\n");
  auto first = load_ensembles(in, {});
  ASSERT_EQ(first.ensembles.size(), 1u);
  std::istringstream again(ensemble_to_jsonl(first.ensembles[0]) + "\n");
  auto second = load_ensembles(again, {});
  ASSERT_EQ(second.ensembles.size(), 1u);
  EXPECT_EQ(ensemble_to_jsonl(second.ensembles[0]), ensemble_to_jsonl(first.ensembles[0]));
}

}  // namespace
}  // namespace calib
