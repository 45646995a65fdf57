#include "calib/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "calib/calibration.hpp"
#include "calib/llm_client.hpp"
#include "calib/report.hpp"
#include "calib/roscoe.hpp"
#include "calib/synth.hpp"
#include "calib/verification.hpp"
#include "text_util.hpp"

namespace calib::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
}

void report_diagnostics(std::ostream& err, const std::string& file,
                        const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    err << file;
    if (d.line > 0) err << ':' << d.line;
    err << ": " << d.message << '\n';
  }
}

// Records what a run consumed and how it was configured.
class Manifest {
 public:
  explicit Manifest(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  void input(const std::string& path) {
    if (path.empty()) return;
    inputs_.push_back({{"path", path}, {"sha256", sha256_hex(read_file(path))}});
  }
  void set(const std::string& key, json value) { config_[key] = std::move(value); }
  void output(const std::string& name) { outputs_.push_back(name); }

  void write(const fs::path& dir) const {
    json doc;
    doc["tool"] = "calib";
    doc["version"] = kToolVersion;
    doc["subcommand"] = subcommand_;
    doc["inputs"] = inputs_;
    doc["config"] = config_;
    doc["config_hash"] = sha256_hex(subcommand_ + '\n' + config_.dump());
    doc["outputs"] = outputs_;
    write_file(dir / "manifest.json", doc.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  json inputs_ = json::array();
  json config_ = json::object();
  std::vector<std::string> outputs_;
};

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());
  return p;
}

std::vector<PathEnsemble> load_ensemble_file(const std::string& path, std::size_t max_steps,
                                             std::optional<std::size_t> n_paths,
                                             std::ostream& err) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  LoadOptions opts;
  opts.max_steps = max_steps;
  opts.expected_paths = n_paths;
  auto loaded = load_ensembles(in, opts);
  report_diagnostics(err, path, loaded.diagnostics);
  if (loaded.ensembles.empty()) throw Error(ErrorCode::kEmptyInput, path + " holds no valid ensembles");
  return std::move(loaded.ensembles);
}

std::map<std::string, StepVerdicts> load_verdict_file(const std::string& path,
                                                      const std::vector<PathEnsemble>& ensembles,
                                                      std::ostream& err) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  auto loaded = load_oracle_verdicts(in, ensembles);
  report_diagnostics(err, path, loaded.diagnostics);
  return std::move(loaded.verdicts);
}

std::vector<StepVerdicts> align_verdicts(const std::vector<PathEnsemble>& ensembles,
                                         const std::map<std::string, StepVerdicts>& table) {
  std::vector<StepVerdicts> out;
  out.reserve(ensembles.size());
  for (const auto& e : ensembles) {
    auto it = table.find(e.question_id);
    if (it == table.end()) {
      throw Error(ErrorCode::kOracleMissing, "no verdicts for question '" + e.question_id + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  double v[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    auto next = spec.find(':', pos);
    if ((i < 2) == (next == std::string::npos)) {
      throw Error(ErrorCode::kInvalidArgument, "grid must look like start:stop:step, got '" + spec + "'");
    }
    const std::string part = spec.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    try {
      std::size_t used = 0;
      v[i] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad grid component '" + part + "'");
    }
    pos = next + 1;
  }
  return alpha_grid(v[0], v[1], v[2]);
}

std::pair<std::string, std::string> split_labeled(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw Error(ErrorCode::kInvalidArgument, "expected label=path, got '" + arg + "'");
  }
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

std::vector<SelectionResult> load_selection_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  return report::load_selections(in);
}

// Averages a metrics.csv written by the metrics subcommand.
roscoe::MetricReport load_metrics_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  if (text::trim(line) != report::metrics_csv_header()) {
    throw Error(ErrorCode::kSchemaViolation, path + ": unexpected metrics header");
  }
  std::vector<roscoe::MetricReport> rows;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    std::vector<double> cells;
    std::stringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');  // question_id
    while (std::getline(ls, cell, ',')) cells.push_back(std::stod(cell));
    if (cells.size() != 5) throw Error(ErrorCode::kSchemaViolation, path + ": bad metrics row");
    roscoe::MetricReport r;
    r.faithfulness_step = cells[0];
    r.informativeness_path = cells[1];
    r.consistency_steps = cells[2];
    r.consistency_path = cells[3];
    r.perplexity_path = cells[4];
    rows.push_back(r);
  }
  return roscoe::aggregate_metrics(rows);
}

struct Common {
  std::string out_dir = "calib-out";
  std::size_t max_steps = 3;
  std::optional<std::size_t> n_paths;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--m", c.max_steps, "Steps per path (M)")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--n", c.n_paths, "Expected paths per question (N)")->check(CLI::PositiveNumber);
}

void record_common(Manifest& m, const Common& c) {
  m.set("m", c.max_steps);
  if (c.n_paths) m.set("n", *c.n_paths);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unified answer calibration toolkit", "calib"};
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "Read options from a key=value file");
  app.require_subcommand(1);

  Common common;

  // shape
  std::string ensembles_path;
  auto* shape = app.add_subcommand("shape", "Normalize raw ensembles into fixed N x M records");
  add_common(shape, common);
  shape->add_option("--ensembles", ensembles_path, "Raw ensemble JSONL")->required()->check(CLI::ExistingFile);

  // verify
  std::string oracle_path, cache_path, audit_path, model, base_url, template_id = kDefaultTemplateId;
  std::size_t concurrency = 4;
  int retries = 3;
  auto* verify = app.add_subcommand("verify", "Produce step verdicts from an oracle file or an endpoint");
  add_common(verify, common);
  verify->add_option("--ensembles", ensembles_path)->required()->check(CLI::ExistingFile);
  verify->add_option("--oracle", oracle_path, "Verdict table to use instead of an endpoint")->check(CLI::ExistingFile);
  verify->add_option("--base-url", base_url, "Chat-completion base URL (default $CALIB_LLM_BASE)");
  verify->add_option("--model", model, "Model identifier");
  verify->add_option("--template", template_id)->capture_default_str();
  verify->add_option("--cache", cache_path, "Verdict cache JSONL, read and updated");
  verify->add_option("--audit", audit_path, "Audit log JSONL (default <out>/audit.jsonl)");
  verify->add_option("--concurrency", concurrency)->capture_default_str()->check(CLI::PositiveNumber);
  verify->add_option("--retries", retries)->capture_default_str()->check(CLI::NonNegativeNumber);

  // calibrate
  std::string verdicts_path, strategy_name;
  double alpha = 0.5;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Select one answer per question");
  add_common(calibrate_cmd, common);
  calibrate_cmd->add_option("--ensembles", ensembles_path)->required()->check(CLI::ExistingFile);
  calibrate_cmd->add_option("--verdicts", verdicts_path)->check(CLI::ExistingFile);
  auto* alpha_opt = calibrate_cmd->add_option("--alpha", alpha, "Unified weight in [0, 1]")
                        ->check(CLI::Range(0.0, 1.0));
  auto* strategy_opt = calibrate_cmd->add_option("--strategy", strategy_name, "sc or sv")
                           ->check(CLI::IsMember({"sc", "sv"}));
  alpha_opt->excludes(strategy_opt);

  // sweep
  std::string grid = "0:1:0.05";
  std::size_t workers = 0;
  auto* sweep = app.add_subcommand("sweep", "Accuracy across an alpha grid");
  add_common(sweep, common);
  sweep->add_option("--ensembles", ensembles_path)->required()->check(CLI::ExistingFile);
  sweep->add_option("--verdicts", verdicts_path)->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid, "start:stop:step")->capture_default_str();
  sweep->add_option("--workers", workers, "0 uses every core")->capture_default_str();

  // thresholds
  std::size_t thr_n = 0, thr_m = 0;
  std::string thr_out;
  auto* thresholds = app.add_subcommand("thresholds", "Print the two dominance thresholds");
  thresholds->add_option("--n", thr_n)->required()->check(CLI::PositiveNumber);
  thresholds->add_option("--m", thr_m)->required()->check(CLI::PositiveNumber);
  thresholds->add_option("--out", thr_out, "Write a manifest here");

  // metrics
  std::string sidecars_path, selections_path;
  bool all_paths = false;
  auto* metrics = app.add_subcommand("metrics", "Score reasoning paths from a sidecar file");
  metrics->add_option("--out", common.out_dir)->capture_default_str();
  metrics->add_option("--sidecars", sidecars_path)->required()->check(CLI::ExistingFile);
  auto* sel_opt = metrics->add_option("--selections", selections_path, "Score only the selected paths")
                      ->check(CLI::ExistingFile);
  auto* all_opt = metrics->add_flag("--all-paths", all_paths, "Score every path");
  sel_opt->excludes(all_opt);

  // synth
  synth::SynthSpec spec;
  std::string search_grid;
  std::size_t trials = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic ensembles with known ground truth");
  synth_cmd->add_option("--out", common.out_dir)->capture_default_str();
  synth_cmd->add_option("--n", spec.n_paths)->capture_default_str();
  synth_cmd->add_option("--m", spec.max_steps)->capture_default_str();
  synth_cmd->add_option("--p-final", spec.p_final_correct)->capture_default_str();
  synth_cmd->add_option("--p-step-right", spec.p_step_correct_given_final,
                        "P(step verdict true | path answer correct)")->capture_default_str();
  synth_cmd->add_option("--p-step-wrong", spec.p_step_correct_given_wrong,
                        "P(step verdict true | path answer wrong)")->capture_default_str();
  synth_cmd->add_option("--distractors", spec.distractor_count)->capture_default_str();
  synth_cmd->add_option("--seed", spec.seed)->capture_default_str();
  synth_cmd->add_option("--questions", spec.questions)->capture_default_str();
  synth_cmd->add_option("--search-grid", search_grid, "Also search alpha over start:stop:step");
  synth_cmd->add_option("--trials", trials, "Questions per alpha in the search (default --questions)");
  synth_cmd->add_option("--workers", workers)->capture_default_str();

  // report
  std::string baseline_arg, dataset = "dataset";
  std::vector<std::string> variant_args, metric_args;
  auto* report_cmd = app.add_subcommand("report", "Accuracy and delta table against a baseline run");
  report_cmd->add_option("--out", common.out_dir)->capture_default_str();
  report_cmd->add_option("--ensembles", ensembles_path, "Ensembles carrying gold answers")
      ->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--m", common.max_steps)->capture_default_str();
  report_cmd->add_option("--baseline", baseline_arg, "label=selections.jsonl")->required();
  report_cmd->add_option("--variant", variant_args, "label=selections.jsonl, repeatable");
  report_cmd->add_option("--metrics", metric_args, "label=metrics.csv, repeatable");
  report_cmd->add_option("--dataset", dataset)->capture_default_str();

  std::vector<std::string> argv_store;
  argv_store.emplace_back("calib");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (app.get_subcommands().empty()) err << app.help();
    return 1;
  }

  try {
    if (*shape) {
      Manifest mf("shape");
      record_common(mf, common);
      mf.input(ensembles_path);
      auto ensembles = load_ensemble_file(ensembles_path, common.max_steps, common.n_paths, err);
      auto dir = prepare_out(common.out_dir);
      std::string body;
      for (const auto& e : ensembles) body += ensemble_to_jsonl(e) + "\n";
      write_file(dir / "ensembles.jsonl", body);
      mf.output("ensembles.jsonl");
      mf.write(dir);
      out << "shaped " << ensembles.size() << " questions\n";
      return 0;
    }

    if (*verify) {
      Manifest mf("verify");
      record_common(mf, common);
      mf.input(ensembles_path);
      auto ensembles = load_ensemble_file(ensembles_path, common.max_steps, common.n_paths, err);
      auto dir = prepare_out(common.out_dir);

      std::unique_ptr<VerdictSource> source;
      std::shared_ptr<VerdictCache> cache;
      if (!oracle_path.empty()) {
        mf.input(oracle_path);
        mf.set("source", "oracle");
        source = std::make_unique<OracleVerdictSource>(load_verdict_file(oracle_path, ensembles, err));
      } else {
        auto endpoint = EndpointConfig::from_env();
        if (!base_url.empty()) endpoint.base_url = base_url;
        if (!model.empty()) endpoint.model = model;
        if (endpoint.base_url.empty()) {
          throw Error(ErrorCode::kInvalidArgument, "verify needs --oracle, --base-url or CALIB_LLM_BASE");
        }
        RetryPolicy retry;
        retry.max_retries = retries;
        auto audit = std::make_shared<AuditLog>(audit_path.empty() ? (dir / "audit.jsonl").string() : audit_path);
        auto client = std::make_shared<LlmClient>(endpoint, retry, audit);
        cache = std::make_shared<VerdictCache>();
        if (!cache_path.empty() && fs::exists(cache_path)) {
          std::ifstream cin(cache_path);
          cache->load(cin);
        }
        LlmVerifierOptions opts;
        opts.template_id = template_id;
        opts.max_concurrency = concurrency;
        source = std::make_unique<LlmVerdictSource>(client, cache, opts);
        mf.set("source", "llm");
        mf.set("base_url", endpoint.base_url);
        mf.set("model", endpoint.model);
        mf.set("template", template_id);
        mf.set("temperature", opts.decoding.temperature);
        mf.set("retries", retries);
      }

      std::string body;
      std::size_t calls = 0, hits = 0, failures = 0;
      for (const auto& e : ensembles) {
        auto outcome = verify_ensemble(e, *source);
        report_diagnostics(err, e.question_id, outcome.diagnostics);
        calls += outcome.endpoint_calls;
        hits += outcome.cache_hits;
        failures += outcome.transport_failures;
        body += verdicts_to_jsonl(outcome.verdicts) + "\n";
      }
      write_file(dir / "verdicts.jsonl", body);
      mf.output("verdicts.jsonl");
      if (cache && !cache_path.empty()) {
        std::ofstream cout_(cache_path, std::ios::trunc);
        if (!cout_) throw Error(ErrorCode::kIoError, "cannot write " + cache_path);
        cache->save(cout_);
      }
      mf.write(dir);
      out << "verified " << ensembles.size() << " questions (" << calls << " endpoint calls, " << hits
          << " cache hits)\n";
      if (failures > 0) {
        err << failures << " step verdicts defaulted to false after transport failures\n";
        return 2;
      }
      return 0;
    }

    if (*calibrate_cmd) {
      Strategy strategy = Strategy::self_consistency();
      if (alpha_opt->count() > 0) {
        strategy = Strategy::unified(alpha);
      } else if (strategy_name == "sv") {
        strategy = Strategy::self_verification();
      } else if (strategy_name.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "calibrate needs --alpha or --strategy");
      }
      Manifest mf("calibrate");
      record_common(mf, common);
      mf.set("strategy", strategy.name());
      if (strategy.kind == StrategyKind::kUnified) mf.set("alpha", strategy.alpha);
      mf.input(ensembles_path);
      mf.input(verdicts_path);
      auto ensembles = load_ensemble_file(ensembles_path, common.max_steps, common.n_paths, err);
      std::map<std::string, StepVerdicts> table;
      if (!verdicts_path.empty()) table = load_verdict_file(verdicts_path, ensembles, err);
      const bool needs_verdicts = strategy.kind != StrategyKind::kSelfConsistency &&
                                  !(strategy.kind == StrategyKind::kUnified && strategy.alpha == 1.0);

      auto dir = prepare_out(common.out_dir);
      std::vector<SelectionResult> selections;
      std::string body;
      for (const auto& e : ensembles) {
        const StepVerdicts* v = nullptr;
        if (auto it = table.find(e.question_id); it != table.end()) v = &it->second;
        if (needs_verdicts && v == nullptr) {
          throw Error(ErrorCode::kOracleMissing, "no verdicts for question '" + e.question_id + "'");
        }
        selections.push_back(calibrate(e, v, strategy));
        body += report::selection_to_jsonl(selections.back()) + "\n";
      }
      write_file(dir / "selections.jsonl", body);
      mf.output("selections.jsonl");
      mf.write(dir);

      auto gold = report::gold_answers(ensembles);
      if (gold.size() == ensembles.size()) {
        out << "accuracy " << report::format_fixed2(100.0 * report::accuracy(selections, gold)) << '\n';
      } else {
        out << "selected answers for " << selections.size() << " questions\n";
      }
      return 0;
    }

    if (*sweep) {
      auto alphas = parse_grid(grid);
      Manifest mf("sweep");
      record_common(mf, common);
      mf.set("grid", grid);
      mf.input(ensembles_path);
      mf.input(verdicts_path);
      auto ensembles = load_ensemble_file(ensembles_path, common.max_steps, common.n_paths, err);
      auto verdicts = align_verdicts(ensembles, load_verdict_file(verdicts_path, ensembles, err));
      auto curve = alpha_sweep(ensembles, verdicts, alphas, workers);
      auto dir = prepare_out(common.out_dir);
      report::emit_sweep_artifacts(curve, dir.string());
      mf.output("sweep.csv");
      mf.output("sweep.svg");
      mf.write(dir);
      for (const auto& p : curve.points) {
        out << report::format_real(p.alpha) << ' ' << report::format_fixed2(100.0 * p.accuracy) << '\n';
      }
      return 0;
    }

    if (*thresholds) {
      auto step = step_dominance_threshold(thr_n, thr_m);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6f", step.value);
      out << "step " << buf << (step.degenerate ? " (degenerate: N < 3)" : "") << '\n';
      if (thr_n >= 2) {
        std::snprintf(buf, sizeof(buf), "%.6f", path_dominance_threshold(thr_n));
        out << "path " << buf << '\n';
      } else {
        out << "path undefined (N < 2)\n";
      }
      if (!thr_out.empty()) {
        Manifest mf("thresholds");
        mf.set("n", thr_n);
        mf.set("m", thr_m);
        mf.write(prepare_out(thr_out));
      }
      return 0;
    }

    if (*metrics) {
      if (selections_path.empty() && !all_paths) {
        throw Error(ErrorCode::kInvalidArgument, "metrics needs --selections or --all-paths");
      }
      Manifest mf("metrics");
      mf.input(sidecars_path);
      mf.input(selections_path);
      mf.set("all_paths", all_paths);
      std::ifstream in(sidecars_path);
      auto loaded = roscoe::load_sidecars(in);
      report_diagnostics(err, sidecars_path, loaded.diagnostics);

      std::map<std::string, std::size_t> chosen;
      if (!all_paths) {
        for (const auto& s : load_selection_file(selections_path)) chosen[s.question_id] = s.path_index;
      }
      std::string body = report::metrics_csv_header() + "\n";
      std::vector<roscoe::MetricReport> reports;
      for (const auto& sc : loaded.sidecars) {
        if (!all_paths) {
          auto it = chosen.find(sc.question_id);
          if (it == chosen.end() || it->second != sc.path_index) continue;
        }
        if (!sc.has_source()) continue;
        try {
          auto r = roscoe::compute_report(sc);
          reports.push_back(r);
          std::string id = sc.question_id;
          if (all_paths) id += "#" + std::to_string(sc.path_index);
          body += report::metrics_csv_row(id, r) + "\n";
        } catch (const Error& e) {
          err << sidecars_path << ": " << sc.question_id << " path " << sc.path_index << ": " << e.what()
              << '\n';
        }
      }
      auto dir = prepare_out(common.out_dir);
      write_file(dir / "metrics.csv", body);
      mf.output("metrics.csv");
      mf.write(dir);
      auto agg = roscoe::aggregate_metrics(reports);
      out << "faithfulness " << roscoe::format_percent(agg.faithfulness_step) << '\n'
          << "informativeness " << roscoe::format_percent(agg.informativeness_path) << '\n'
          << "consistency_steps " << roscoe::format_percent(agg.consistency_steps) << '\n'
          << "consistency_path " << roscoe::format_percent(agg.consistency_path) << '\n'
          << "perplexity " << roscoe::format_percent(agg.perplexity_path) << '\n';
      return 0;
    }

    if (*synth_cmd) {
      spec.validate();
      Manifest mf("synth");
      mf.set("n", spec.n_paths);
      mf.set("m", spec.max_steps);
      mf.set("p_final", spec.p_final_correct);
      mf.set("p_step_right", spec.p_step_correct_given_final);
      mf.set("p_step_wrong", spec.p_step_correct_given_wrong);
      mf.set("distractors", spec.distractor_count);
      mf.set("seed", spec.seed);
      mf.set("questions", spec.questions);
      if (!spec.informative_signal()) {
        err << "warning: verdicts are less likely on correct paths than on wrong ones\n";
      }
      auto dir = prepare_out(common.out_dir);
      std::string ens_body, ver_body;
      for (std::size_t i = 0; i < spec.questions; ++i) {
        auto q = synth::generate_ensemble(spec, i);
        ens_body += ensemble_to_jsonl(q.ensemble) + "\n";
        ver_body += verdicts_to_jsonl(q.verdicts) + "\n";
      }
      write_file(dir / "ensembles.jsonl", ens_body);
      write_file(dir / "verdicts.jsonl", ver_body);
      mf.output("ensembles.jsonl");
      mf.output("verdicts.jsonl");
      if (!search_grid.empty()) {
        auto alphas = parse_grid(search_grid);
        const std::size_t n_trials = trials > 0 ? trials : spec.questions;
        mf.set("search_grid", search_grid);
        mf.set("trials", n_trials);
        auto search = synth::brute_force_best_alpha(spec, alphas, n_trials, workers);
        SweepCurve curve;
        for (const auto& [a, est] : search.curve) curve.points.push_back({a, est.accuracy, est.trials});
        curve.step_threshold = step_dominance_threshold(spec.n_paths, spec.max_steps);
        if (spec.n_paths >= 2) curve.path_threshold = path_dominance_threshold(spec.n_paths);
        report::emit_sweep_artifacts(curve, dir.string());
        mf.output("sweep.csv");
        mf.output("sweep.svg");
        out << "best alpha " << report::format_real(search.best_alpha) << '\n';
      }
      mf.write(dir);
      out << "generated " << spec.questions << " questions\n";
      return 0;
    }

    if (*report_cmd) {
      Manifest mf("report");
      mf.set("dataset", dataset);
      mf.input(ensembles_path);
      auto ensembles = load_ensemble_file(ensembles_path, common.max_steps, std::nullopt, err);
      auto gold = report::gold_answers(ensembles);

      std::map<std::string, std::string> metric_files;
      for (const auto& a : metric_args) {
        auto [label, path] = split_labeled(a);
        mf.input(path);
        metric_files[label] = path;
      }
      auto summarize = [&](const std::string& arg) {
        auto [label, path] = split_labeled(arg);
        mf.input(path);
        auto run = report::summarize_run(label, dataset, load_selection_file(path), gold);
        if (auto it = metric_files.find(label); it != metric_files.end()) {
          run.metrics = load_metrics_csv(it->second);
        }
        return run;
      };
      auto baseline = summarize(baseline_arg);
      std::vector<report::RunSummary> variants;
      for (const auto& v : variant_args) variants.push_back(summarize(v));
      auto delta = report::emit_delta_report(baseline, variants);

      auto dir = prepare_out(common.out_dir);
      write_file(dir / "report.md", delta.to_markdown());
      write_file(dir / "report.csv", delta.to_csv());
      mf.output("report.md");
      mf.output("report.csv");
      mf.write(dir);
      out << delta.to_markdown();
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_transport() ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace calib::cli
