#include "calib/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace calib::report {
namespace {

using json = nlohmann::json;

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string s = buf;
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

Strategy parse_strategy(const std::string& name, double alpha) {
  if (name == "sc") return Strategy::self_consistency();
  if (name == "sv") return Strategy::self_verification();
  if (name == "unified") return Strategy::unified(alpha);
  throw Error(ErrorCode::kSchemaViolation, "unknown strategy '" + name + "'");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
}

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

double plot_x(double alpha) { return kLeft + alpha * (kWidth - kLeft - kRight); }
double plot_y(double accuracy) { return kHeight - kBottom - accuracy * (kHeight - kTop - kBottom); }

void threshold_marker(std::ostringstream& svg, double alpha, const std::string& label) {
  const double x = plot_x(alpha);
  svg << "<line x1=\"" << fixed(x, 2) << "\" y1=\"" << fixed(kTop, 2) << "\" x2=\"" << fixed(x, 2)
      << "\" y2=\"" << fixed(kHeight - kBottom, 2)
      << "\" stroke=\"#c0392b\" stroke-dasharray=\"4 3\"/>\n";
  svg << "<text x=\"" << fixed(x, 2) << "\" y=\"" << fixed(kTop - 8, 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" fill=\"#c0392b\">&#9733; " << label
      << "</text>\n";
}

}  // namespace

double accuracy(const std::vector<SelectionResult>& selections,
                const std::map<std::string, NormalizedAnswer>& gold) {
  if (selections.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : selections) {
    auto it = gold.find(s.question_id);
    if (it == gold.end()) {
      throw Error(ErrorCode::kMissingGold, "question '" + s.question_id + "' has no gold answer");
    }
    if (s.answer.canonical == it->second.canonical) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(selections.size());
}

std::map<std::string, NormalizedAnswer> gold_answers(const std::vector<PathEnsemble>& ensembles) {
  std::map<std::string, NormalizedAnswer> gold;
  for (const auto& e : ensembles) {
    if (e.gold_answer) gold.emplace(e.question_id, *e.gold_answer);
  }
  return gold;
}

std::string format_real(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return fixed(value, 17);
  return std::string(buf, end);
}

std::string format_fixed2(double value) { return fixed(value, 2); }

std::string format_value_delta(double value, double delta) {
  std::string d = fixed(delta, 2);
  if (!d.starts_with("-")) d.insert(d.begin(), '+');
  return fixed(value, 2) + "(" + d + ")";
}

std::string format_with_delta(double value, double baseline) {
  return format_value_delta(value, value - baseline);
}

std::string selection_to_jsonl(const SelectionResult& selection) {
  json scores = json::array();
  for (const auto& s : selection.scores) scores.push_back({{"n", s.n}, {"m", s.m}, {"d", s.d}});
  json rec = {{"question_id", selection.question_id},
              {"strategy", selection.strategy.name()},
              {"alpha", selection.strategy.alpha},
              {"path_index", selection.path_index},
              {"answer", selection.answer.canonical},
              {"scores", scores}};
  return rec.dump();
}

std::vector<SelectionResult> load_selections(std::istream& in) {
  std::vector<SelectionResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto rec = json::parse(line);
      SelectionResult s;
      s.question_id = rec.at("question_id").get<std::string>();
      s.path_index = rec.at("path_index").get<std::size_t>();
      s.answer = {AnswerKind::kFreeform, rec.at("answer").get<std::string>()};
      s.strategy = parse_strategy(rec.at("strategy").get<std::string>(), rec.value("alpha", 0.0));
      std::size_t i = 0;
      for (const auto& sc : rec.value("scores", json::array())) {
        s.scores.push_back({i++, sc.at("n").get<std::size_t>(), sc.at("m").get<std::size_t>(),
                            sc.at("d").get<double>()});
      }
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation,
                  "selection line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

RunSummary summarize_run(std::string label, std::string dataset,
                         const std::vector<SelectionResult>& selections,
                         const std::map<std::string, NormalizedAnswer>& gold) {
  RunSummary run;
  run.label = std::move(label);
  run.dataset = std::move(dataset);
  for (const auto& s : selections) run.question_ids.insert(s.question_id);
  run.accuracy = accuracy(selections, gold) * 100.0;
  return run;
}

DeltaReport emit_delta_report(const RunSummary& baseline, const std::vector<RunSummary>& variants) {
  DeltaReport report;
  const bool with_metrics = baseline.metrics.has_value();
  if (with_metrics) {
    report.metric_columns = {"faithfulness", "informativeness", "consistency_steps",
                             "consistency_path", "perplexity"};
  }
  auto metric_values = [](const roscoe::MetricReport& m) {
    return std::vector<double>{m.faithfulness_step * 100.0, m.informativeness_path * 100.0,
                               m.consistency_steps * 100.0, m.consistency_path * 100.0,
                               m.perplexity_path * 100.0};
  };
  const auto base_metrics = with_metrics ? metric_values(*baseline.metrics) : std::vector<double>{};

  DeltaRow base_row;
  base_row.dataset = baseline.dataset;
  base_row.strategy = baseline.label;
  base_row.is_baseline = true;
  base_row.accuracy = {baseline.accuracy, 0.0};
  for (double v : base_metrics) base_row.metrics.push_back({v, 0.0});
  report.rows.push_back(base_row);

  for (const auto& v : variants) {
    if (v.question_ids != baseline.question_ids) {
      throw Error(ErrorCode::kQuestionSetMismatch,
                  "run '" + v.label + "' covers a different question set than '" + baseline.label + "'");
    }
    DeltaRow row;
    row.dataset = v.dataset;
    row.strategy = v.label;
    row.accuracy = {v.accuracy, v.accuracy - baseline.accuracy};
    if (with_metrics) {
      if (!v.metrics) {
        throw Error(ErrorCode::kInvalidArgument, "run '" + v.label + "' has no metrics");
      }
      auto values = metric_values(*v.metrics);
      for (std::size_t i = 0; i < values.size(); ++i) {
        row.metrics.push_back({values[i], values[i] - base_metrics[i]});
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string DeltaReport::to_markdown() const {
  std::ostringstream out;
  out << "| dataset | strategy | accuracy";
  for (const auto& c : metric_columns) out << " | " << c;
  out << " |\n|---|---|---";
  for (std::size_t i = 0; i < metric_columns.size(); ++i) out << "|---";
  out << "|\n";
  auto cell = [](const DeltaRow& row, const DeltaCell& c) {
    return row.is_baseline ? format_fixed2(c.value) : format_value_delta(c.value, c.delta);
  };
  for (const auto& row : rows) {
    out << "| " << row.dataset << " | " << row.strategy << " | " << cell(row, row.accuracy);
    for (const auto& m : row.metrics) out << " | " << cell(row, m);
    out << " |\n";
  }
  return out.str();
}

std::string DeltaReport::to_csv() const {
  std::ostringstream out;
  out << "dataset,strategy,accuracy,accuracy_delta";
  for (const auto& c : metric_columns) out << ',' << c << ',' << c << "_delta";
  out << '\n';
  for (const auto& row : rows) {
    out << row.dataset << ',' << row.strategy << ',' << format_real(row.accuracy.value) << ','
        << format_real(row.accuracy.delta);
    for (const auto& m : row.metrics) out << ',' << format_real(m.value) << ',' << format_real(m.delta);
    out << '\n';
  }
  return out.str();
}

std::string sweep_csv(const SweepCurve& curve) {
  std::ostringstream out;
  out << "alpha,accuracy,n_questions\n";
  for (const auto& p : curve.points) {
    out << format_real(p.alpha) << ',' << format_real(p.accuracy) << ',' << p.n_questions << '\n';
  }
  return out.str();
}

std::string sweep_svg(const SweepCurve& curve) {
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth, 0) << "\" height=\""
      << fixed(kHeight, 0) << "\" viewBox=\"0 0 " << fixed(kWidth, 0) << ' ' << fixed(kHeight, 0)
      << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes with ticks every 0.25.
  svg << "<line x1=\"" << fixed(plot_x(0), 2) << "\" y1=\"" << fixed(plot_y(0), 2) << "\" x2=\""
      << fixed(plot_x(1), 2) << "\" y2=\"" << fixed(plot_y(0), 2) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fixed(plot_x(0), 2) << "\" y1=\"" << fixed(plot_y(0), 2) << "\" x2=\""
      << fixed(plot_x(0), 2) << "\" y2=\"" << fixed(plot_y(1), 2) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t * 0.25;
    svg << "<text x=\"" << fixed(plot_x(v), 2) << "\" y=\"" << fixed(plot_y(0) + 18, 2)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fixed(v, 2) << "</text>\n";
    svg << "<text x=\"" << fixed(plot_x(0) - 6, 2) << "\" y=\"" << fixed(plot_y(v) + 4, 2)
        << "\" text-anchor=\"end\" font-size=\"11\">" << fixed(v * 100.0, 0) << "</text>\n";
  }
  svg << "<text x=\"" << fixed(plot_x(0.5), 2) << "\" y=\"" << fixed(kHeight - 12, 2)
      << "\" text-anchor=\"middle\" font-size=\"12\">alpha</text>\n";
  svg << "<text x=\"14\" y=\"" << fixed(plot_y(0.5), 2)
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " << fixed(plot_y(0.5), 2)
      << ")\">accuracy (%)</text>\n";

  if (curve.points.size() > 1) {
    svg << "<polyline fill=\"none\" stroke=\"#2c3e50\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      if (i) svg << ' ';
      svg << fixed(plot_x(curve.points[i].alpha), 2) << ',' << fixed(plot_y(curve.points[i].accuracy), 2);
    }
    svg << "\"/>\n";
  }
  for (const auto& p : curve.points) {
    svg << "<circle cx=\"" << fixed(plot_x(p.alpha), 2) << "\" cy=\"" << fixed(plot_y(p.accuracy), 2)
        << "\" r=\"3\" fill=\"#2c3e50\"/>\n";
  }
  if (!curve.step_threshold.degenerate) {
    threshold_marker(svg, curve.step_threshold.value, fixed(curve.step_threshold.value, 6));
  }
  if (curve.path_threshold) threshold_marker(svg, *curve.path_threshold, fixed(*curve.path_threshold, 6));
  svg << "</svg>\n";
  return svg.str();
}

void emit_sweep_artifacts(const SweepCurve& curve, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(std::filesystem::path(out_dir) / "sweep.csv", sweep_csv(curve));
  write_file(std::filesystem::path(out_dir) / "sweep.svg", sweep_svg(curve));
}

std::string metrics_csv_header() {
  return "question_id,faithfulness,informativeness,consistency_steps,consistency_path,perplexity";
}

std::string metrics_csv_row(const std::string& question_id, const roscoe::MetricReport& r) {
  return question_id + "," + format_real(r.faithfulness_step) + "," +
         format_real(r.informativeness_path) + "," + format_real(r.consistency_steps) + "," +
         format_real(r.consistency_path) + "," + format_real(r.perplexity_path);
}

}  // namespace calib::report
