#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "calib/report.hpp"

namespace calib::report {
namespace {

SelectionResult pick(const std::string& qid, const std::string& answer) {
  SelectionResult s;
  s.question_id = qid;
  s.answer = {AnswerKind::kNumeric, answer};
  s.strategy = Strategy::self_consistency();
  return s;
}

RunSummary run_with(const std::string& label, double acc, std::set<std::string> ids = {"a", "b"}) {
  RunSummary r;
  r.label = label;
  r.dataset = "GSM8K";
  r.accuracy = acc;
  r.question_ids = std::move(ids);
  return r;
}

TEST(Accuracy, Counts) {
  std::map<std::string, NormalizedAnswer> gold = {{"a", {AnswerKind::kNumeric, "1"}},
                                                  {"b", {AnswerKind::kNumeric, "2"}},
                                                  {"c", {AnswerKind::kNumeric, "3"}},
                                                  {"d", {AnswerKind::kNumeric, "4"}}};
  std::vector<SelectionResult> sel = {pick("a", "1"), pick("b", "2"), pick("c", "3"), pick("d", "0")};
  EXPECT_EQ(format_fixed2(100 * accuracy(sel, gold)), "75.00");
  std::vector<SelectionResult> none = {pick("a", "9"), pick("b", "9")};
  EXPECT_EQ(format_fixed2(100 * accuracy(none, gold)), "0.00");
  std::vector<SelectionResult> unknown = {pick("z", "1")};
  EXPECT_THROW(accuracy(unknown, gold), Error);
}

TEST(Accuracy, MajorityFixture) {
  // 100 questions; the majority answer is gold on the first 87.
  std::vector<PathEnsemble> es;
  for (int q = 0; q < 100; ++q) {
    PathEnsemble e;
    e.question_id = "q" + std::to_string(q);
    for (const char* a : {"5", "5", "5", "6", "7"}) {
      e.paths.push_back(shape_path({"s"}, {AnswerKind::kNumeric, a}, 3));
    }
    e.gold_answer = NormalizedAnswer{AnswerKind::kNumeric, q < 87 ? "5" : "6"};
    es.push_back(e);
  }
  std::vector<SelectionResult> sel;
  for (const auto& e : es) sel.push_back(self_consistency(e));
  EXPECT_EQ(format_fixed2(100 * accuracy(sel, gold_answers(es))), "87.00");
}

TEST(Format, DeltaConvention) {
  EXPECT_EQ(format_with_delta(87.11, 80.21), "87.11(+6.90)");
  EXPECT_EQ(format_with_delta(82.34, 80.21), "82.34(+2.13)");
  EXPECT_EQ(format_with_delta(80.21, 80.21), "80.21(+0.00)");
  EXPECT_EQ(format_with_delta(79.00, 80.21), "79.00(-1.21)");
  EXPECT_EQ(format_fixed2(-0.001), "0.00");
}

TEST(DeltaReport, RendersPaperRows) {
  auto report = emit_delta_report(run_with("CoT", 80.21), {run_with("CoT+SV", 82.34), run_with("CoT+SC", 87.11)});
  const auto md = report.to_markdown();
  EXPECT_NE(md.find("| GSM8K | CoT | 80.21 |"), std::string::npos);
  EXPECT_NE(md.find("82.34(+2.13)"), std::string::npos);
  EXPECT_NE(md.find("87.11(+6.90)"), std::string::npos);
  EXPECT_EQ(report.rows[2].accuracy.delta, 87.11 - 80.21);
  const auto csv = report.to_csv();
  EXPECT_NE(csv.find("GSM8K,CoT+SC,87.11,"), std::string::npos);
}

TEST(DeltaReport, EqualVariant) {
  auto report = emit_delta_report(run_with("base", 50.0), {run_with("same", 50.0)});
  EXPECT_NE(report.to_markdown().find("50.00(+0.00)"), std::string::npos);
}

TEST(DeltaReport, QuestionSetMismatch) {
  try {
    emit_delta_report(run_with("base", 50.0), {run_with("other", 60.0, {"a", "c"})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kQuestionSetMismatch);
  }
}

TEST(DeltaReport, MetricColumns) {
  auto base = run_with("CoT", 80.0);
  roscoe::MetricReport m;
  m.faithfulness_step = 0.9;
  m.informativeness_path = 0.8;
  m.consistency_steps = 0.7;
  m.consistency_path = 0.6;
  m.perplexity_path = 0.5;
  base.metrics = m;
  auto variant = run_with("CoT+SC", 85.0);
  m.faithfulness_step = 0.95;
  variant.metrics = m;
  auto report = emit_delta_report(base, {variant});
  EXPECT_EQ(report.metric_columns.size(), 5u);
  EXPECT_NE(report.to_markdown().find("95.00(+5.00)"), std::string::npos);
}

SweepCurve ten_three_curve() {
  SweepCurve c;
  c.points = {{0.0, 0.5, 10}, {0.5, 0.75, 10}, {1.0, 0.6, 10}};
  c.step_threshold = step_dominance_threshold(10, 3);
  c.path_threshold = path_dominance_threshold(10);
  return c;
}

TEST(Sweep, CsvAndThresholdMarkers) {
  auto c = ten_three_curve();
  EXPECT_EQ(sweep_csv(c), "alpha,accuracy,n_questions\n0,0.5,10\n0.5,0.75,10\n1,0.6,10\n");
  const auto svg = sweep_svg(c);
  EXPECT_NE(svg.find("&#9733; 0.294118"), std::string::npos);
  EXPECT_NE(svg.find("&#9733; 0.909091"), std::string::npos);
  EXPECT_EQ(svg, sweep_svg(ten_three_curve()));
}

TEST(Sweep, SinglePoint) {
  SweepCurve c;
  c.points = {{0.5, 0.8, 3}};
  c.step_threshold = {1.0, true};
  EXPECT_EQ(sweep_csv(c), "alpha,accuracy,n_questions\n0.5,0.8,3\n");
  const auto svg = sweep_svg(c);
  std::size_t circles = 0;
  for (auto p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
  EXPECT_EQ(circles, 1u);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
}

TEST(Sweep, ArtifactsAreByteIdentical) {
  const auto dir = std::filesystem::temp_directory_path() / "calib_sweep_test";
  std::filesystem::remove_all(dir);
  emit_sweep_artifacts(ten_three_curve(), (dir / "a").string());
  emit_sweep_artifacts(ten_three_curve(), (dir / "b").string());
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  EXPECT_EQ(slurp(dir / "a" / "sweep.svg"), slurp(dir / "b" / "sweep.svg"));
  EXPECT_EQ(slurp(dir / "a" / "sweep.csv"), slurp(dir / "b" / "sweep.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Selections, RoundTrip) {
  SelectionResult s = pick("q1", "42");
  s.strategy = Strategy::unified(0.3);
  s.path_index = 2;
  s.scores = {{0, 1, 2, 0.1}, {1, 2, 0, 0.2}, {2, 3, 3, 0.9}};
  std::istringstream in(selection_to_jsonl(s) + "\n");
  auto back = load_selections(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].path_index, 2u);
  EXPECT_EQ(back[0].answer.canonical, "42");
  EXPECT_EQ(back[0].strategy.alpha, 0.3);
  EXPECT_EQ(back[0].scores[2].d, 0.9);
  EXPECT_EQ(selection_to_jsonl(back[0]), selection_to_jsonl(s));
}

}  // namespace
}  // namespace calib::report
