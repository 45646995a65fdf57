#pragma once

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "calib/calibration.hpp"
#include "calib/roscoe.hpp"

namespace calib::report {

/// Fraction of selections whose answer equals the gold answer of their question.
/// Throws MissingGold when a selection's question has no gold answer.
double accuracy(const std::vector<SelectionResult>& selections,
                const std::map<std::string, NormalizedAnswer>& gold);

std::map<std::string, NormalizedAnswer> gold_answers(const std::vector<PathEnsemble>& ensembles);

/// Full-precision, shortest round-trip decimal.
std::string format_real(double value);
/// Two-decimal rendering, e.g. 87.11.
std::string format_fixed2(double value);
/// "87.11(+6.90)"; a delta that rounds to zero renders as "(+0.00)".
std::string format_with_delta(double value, double baseline);
std::string format_value_delta(double value, double delta);

std::string selection_to_jsonl(const SelectionResult& selection);
/// Reads selection records. Answers load with freeform kind; accuracy compares canonical text.
std::vector<SelectionResult> load_selections(std::istream& in);

/// One run of a strategy over a dataset, values in percent.
struct RunSummary {
  std::string label;
  std::string dataset;
  std::set<std::string> question_ids;
  double accuracy = 0.0;
  std::optional<roscoe::MetricReport> metrics;  // fractions in [0, 1]
};

RunSummary summarize_run(std::string label, std::string dataset,
                         const std::vector<SelectionResult>& selections,
                         const std::map<std::string, NormalizedAnswer>& gold);

struct DeltaCell {
  double value = 0.0;
  double delta = 0.0;  // value - baseline value, unrounded
};

struct DeltaRow {
  std::string dataset;
  std::string strategy;
  bool is_baseline = false;
  DeltaCell accuracy;
  std::vector<DeltaCell> metrics;  // percent; empty when the runs carry no metrics
};

struct DeltaReport {
  std::vector<std::string> metric_columns;
  std::vector<DeltaRow> rows;

  [[nodiscard]] std::string to_markdown() const;
  [[nodiscard]] std::string to_csv() const;
};

/// Throws QuestionSetMismatch when a variant covers different questions than the baseline.
DeltaReport emit_delta_report(const RunSummary& baseline, const std::vector<RunSummary>& variants);

std::string sweep_csv(const SweepCurve& curve);
/// Self-contained SVG of the accuracy curve with each threshold marked by a star.
std::string sweep_svg(const SweepCurve& curve);
/// Writes sweep.csv and sweep.svg under `out_dir`.
void emit_sweep_artifacts(const SweepCurve& curve, const std::string& out_dir);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& question_id, const roscoe::MetricReport& report);

}  // namespace calib::report
