#include "calib/ensemble.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace calib {
namespace {

using json = nlohmann::json;

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

void push_trimmed(std::vector<std::string>& out, std::string_view s) {
  auto t = text::trim(s);
  if (!t.empty()) out.emplace_back(t);
}

std::vector<std::string> split_on_markers(std::string_view text) {
  static const std::regex marker(R"(\bstep\s*\d+\s*:)", std::regex::icase);
  std::vector<std::string> out;
  std::size_t body_start = 0;
  bool seen = false;
  for (auto it = std::cregex_iterator(text.begin(), text.end(), marker);
       it != std::cregex_iterator(); ++it) {
    auto pos = static_cast<std::size_t>(it->position(0));
    push_trimmed(out, text.substr(body_start, pos - body_start));
    body_start = pos + static_cast<std::size_t>(it->length(0));
    seen = true;
  }
  if (!seen) return {};
  push_trimmed(out, text.substr(body_start));
  return out;
}

std::vector<std::string> split_numbered_lines(std::string_view text) {
  static const std::regex numbered(R"(^\s*\d+[.)]\s+)");
  auto lines = split_lines(text);
  bool any = std::any_of(lines.begin(), lines.end(),
                         [](const std::string& l) { return std::regex_search(l, numbered); });
  if (!any) return {};

  std::vector<std::string> out;
  std::string current;
  for (const auto& line : lines) {
    std::smatch m;
    if (std::regex_search(line, m, numbered)) {
      push_trimmed(out, current);
      current = line.substr(static_cast<std::size_t>(m.length(0)));
    } else {
      if (!current.empty()) current += ' ';
      current += line;
    }
  }
  push_trimmed(out, current);
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& line : split_lines(text)) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      bool boundary = (c == '.' || c == '!' || c == '?') &&
                      (i + 1 == line.size() ||
                       std::isspace(static_cast<unsigned char>(line[i + 1])));
      if (boundary) {
        push_trimmed(out, std::string_view(line).substr(start, i + 1 - start));
        start = i + 1;
      }
    }
    push_trimmed(out, std::string_view(line).substr(start));
  }
  return out;
}

[[noreturn]] void violation(const std::string& message) {
  throw Error(ErrorCode::kSchemaViolation, message);
}

const json& require(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) violation(std::string("missing field '") + field + "'");
  return *it;
}

std::string require_string(const json& obj, const char* field) {
  const auto& v = require(obj, field);
  if (!v.is_string()) violation(std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> string_array(const json& v, const std::string& what) {
  if (!v.is_array()) violation(what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) violation(what + " must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::optional<NormalizedAnswer> optional_answer(std::string_view raw, AnswerKind kind) {
  if (text::trim(raw).empty()) return std::nullopt;
  try {
    return normalize_answer(raw, kind);
  } catch (const Error&) {
    return std::nullopt;
  }
}

ReasoningPath parse_path(const json& p, std::size_t path_index, AnswerKind kind,
                         std::size_t max_steps) {
  const std::string where = "paths[" + std::to_string(path_index) + "]";
  if (!p.is_object()) violation(where + " must be an object");
  auto raw_it = p.find("raw_text");
  if (raw_it == p.end() || !raw_it->is_string()) {
    violation(where + " missing string field 'raw_text'");
  }
  std::string raw = raw_it->get<std::string>();

  std::vector<std::string> steps;
  if (auto it = p.find("steps"); it != p.end() && !it->is_null()) {
    steps = string_array(*it, where + ".steps");
  } else if (!text::trim(raw).empty()) {
    steps = segment_steps(raw);
  }
  if (steps.empty()) violation(where + " has no steps and empty raw_text");

  std::vector<std::optional<NormalizedAnswer>> step_answers;
  if (auto it = p.find("step_answers"); it != p.end() && !it->is_null()) {
    auto raw_answers = string_array(*it, where + ".step_answers");
    if (raw_answers.size() != steps.size()) {
      violation(where + ".step_answers length differs from steps");
    }
    for (const auto& a : raw_answers) step_answers.push_back(optional_answer(a, kind));
  } else {
    for (const auto& s : steps) step_answers.push_back(extract_final_answer(s, kind));
  }

  std::optional<NormalizedAnswer> final_answer;
  if (auto it = p.find("final_answer"); it != p.end() && !it->is_null()) {
    if (!it->is_string()) violation(where + ".final_answer must be a string");
    try {
      final_answer = normalize_answer(it->get<std::string>(), kind);
    } catch (const Error& e) {
      violation(where + ".final_answer: " + e.what());
    }
  } else {
    final_answer = extract_final_answer(raw, kind);
  }
  if (!final_answer) violation(where + " has no extractable final answer");

  auto path = shape_path(steps, *final_answer, max_steps, step_answers, raw);
  if (auto it = p.find("true_step_count"); it != p.end() && it->is_number_unsigned()) {
    path.true_step_count = std::max(path.true_step_count, it->get<std::size_t>());
  }
  return path;
}

PathEnsemble parse_record(const json& rec, const LoadOptions& options) {
  if (!rec.is_object()) violation("record must be an object");
  PathEnsemble e;
  e.question_id = require_string(rec, "question_id");
  if (e.question_id.empty()) violation("question_id is empty");
  e.question = require_string(rec, "question");
  e.answer_kind = parse_answer_kind(require_string(rec, "answer_kind"));

  const auto& paths = require(rec, "paths");
  if (!paths.is_array()) violation("field 'paths' must be an array");
  if (paths.empty()) violation("'paths' is empty (N must be >= 1)");
  if (options.expected_paths && paths.size() != *options.expected_paths) {
    violation("N mismatch: expected " + std::to_string(*options.expected_paths) + " paths, got " +
              std::to_string(paths.size()));
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    e.paths.push_back(parse_path(paths[i], i, e.answer_kind, options.max_steps));
  }

  if (auto it = rec.find("gold_answer"); it != rec.end() && !it->is_null()) {
    if (!it->is_string()) violation("gold_answer must be a string");
    try {
      e.gold_answer = normalize_answer(it->get<std::string>(), e.answer_kind);
    } catch (const Error& err) {
      violation(std::string("gold_answer: ") + err.what());
    }
  }
  if (auto it = rec.find("gold_rationale_steps"); it != rec.end() && !it->is_null()) {
    e.gold_rationale_steps = string_array(*it, "gold_rationale_steps");
  }
  return e;
}

}  // namespace

std::size_t ReasoningPath::real_step_count() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const ReasoningStep& s) { return !s.is_pad; }));
}

std::vector<std::string> segment_steps(std::string_view rationale) {
  auto segments = split_on_markers(rationale);
  if (segments.empty()) segments = split_numbered_lines(rationale);
  if (segments.empty()) segments = split_sentences(rationale);
  if (segments.empty()) segments.emplace_back(text::trim(rationale));
  return segments;
}

ReasoningPath shape_path(const std::vector<std::string>& step_texts, NormalizedAnswer final_answer,
                         std::size_t max_steps,
                         const std::vector<std::optional<NormalizedAnswer>>& step_answers,
                         std::string raw_text) {
  if (max_steps < 1) throw Error(ErrorCode::kInvalidShape, "M must be >= 1");
  if (step_texts.empty()) throw Error(ErrorCode::kInvalidShape, "a path needs at least one step");

  ReasoningPath path;
  path.final_answer = std::move(final_answer);
  path.raw_text = std::move(raw_text);
  path.true_step_count = step_texts.size();
  path.steps.reserve(max_steps);
  for (std::size_t i = 0; i < max_steps; ++i) {
    ReasoningStep step;
    step.index = i + 1;
    if (i < step_texts.size()) {
      step.text = step_texts[i];
      if (i < step_answers.size()) step.answer = step_answers[i];
    } else {
      step.is_pad = true;
    }
    path.steps.push_back(std::move(step));
  }
  return path;
}

EnsembleLoadResult load_ensembles(std::istream& in, const LoadOptions& options) {
  if (options.max_steps < 1) throw Error(ErrorCode::kInvalidShape, "M must be >= 1");
  EnsembleLoadResult result;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto rec = json::parse(line);
      auto ensemble = parse_record(rec, options);
      if (!seen_ids.insert(ensemble.question_id).second) {
        violation("duplicate question_id '" + ensemble.question_id + "'");
      }
      result.ensembles.push_back(std::move(ensemble));
    } catch (const json::exception& e) {
      result.diagnostics.push_back({line_no, std::string("malformed record: ") + e.what()});
    } catch (const Error& e) {
      result.diagnostics.push_back({line_no, e.what()});
    }
  }
  return result;
}

std::string ensemble_to_jsonl(const PathEnsemble& ensemble) {
  json paths = json::array();
  for (const auto& path : ensemble.paths) {
    json steps = json::array();
    json answers = json::array();
    for (const auto& step : path.steps) {
      if (step.is_pad) break;
      steps.push_back(step.text);
      answers.push_back(step.answer ? step.answer->canonical : std::string());
    }
    paths.push_back({{"raw_text", path.raw_text},
                     {"steps", steps},
                     {"step_answers", answers},
                     {"final_answer", path.final_answer.canonical},
                     {"true_step_count", path.true_step_count}});
  }
  json rec = {{"question_id", ensemble.question_id},
              {"question", ensemble.question},
              {"answer_kind", answer_kind_name(ensemble.answer_kind)},
              {"paths", paths}};
  if (ensemble.gold_answer) rec["gold_answer"] = ensemble.gold_answer->canonical;
  if (ensemble.gold_rationale_steps) rec["gold_rationale_steps"] = *ensemble.gold_rationale_steps;
  return rec.dump();
}

}  // namespace calib
