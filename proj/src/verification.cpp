#include "calib/verification.hpp"

#include <atomic>
#include <cctype>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"
#include "text_util.hpp"

namespace calib {
namespace {

using json = nlohmann::json;

struct MaskedStep {
  std::string text;
  std::optional<std::string> value;
};

MaskedStep mask_step(const std::string& step, const std::optional<std::string>& claimed) {
  auto spans = find_numeric_spans(step);
  std::optional<std::string> value = claimed;
  if (!value && !spans.empty()) value = spans.back().value.canonical;
  if (!value) return {step, std::nullopt};

  for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
    if (it->value.canonical == *value) {
      std::string masked = step;
      masked.replace(it->offset, it->length, "X");
      return {masked, value};
    }
  }
  return {step, value};
}

std::string render_backward_v1(const VerificationRequest& req) {
  const std::size_t k = req.target_step;
  std::ostringstream out;
  out << "Verify one step of a worked solution by backward verification.\n\n";
  out << "Question: " << text::collapse_whitespace(req.question) << "\n\n";
  out << "Earlier steps:\n";
  if (k == 1) out << "(none)\n";
  for (std::size_t i = 1; i < k; ++i) {
    out << "Step " << i << ": " << text::collapse_whitespace(req.path_steps[i - 1]) << '\n';
  }
  out << '\n';

  auto masked = mask_step(text::collapse_whitespace(req.path_steps[k - 1]), req.target_answer);
  if (masked.value) {
    out << "Step " << k << ", with its result masked as X:\n" << masked.text << "\n\n";
    out << "Claimed value: X = " << *masked.value << "\n\n";
    out << "Assume the question as stated and that step " << k << " concludes X = " << *masked.value
        << ". Work backwards: re-derive X from the question and the earlier steps without "
           "trusting the claimed value. Begin your reply with \"correct\" if your derived X "
           "equals the claimed value, otherwise begin with \"incorrect\".\n";
  } else {
    out << "Step " << k << ", under review:\n" << masked.text << "\n\n";
    out << "Assume the question as stated and that step " << k
        << " reaches the conclusion above. Re-derive that conclusion from the question and the "
           "earlier steps without trusting it. Begin your reply with \"correct\" if it follows, "
           "otherwise begin with \"incorrect\".\n";
  }
  return out.str();
}

using TemplateFn = std::function<std::string(const VerificationRequest&)>;

const std::map<std::string, TemplateFn>& templates() {
  static const std::map<std::string, TemplateFn> registry = {
      {"backward-v1", render_backward_v1},
  };
  return registry;
}

StepVerdicts parse_verdict_record(const json& rec) {
  if (!rec.is_object()) throw Error(ErrorCode::kSchemaViolation, "record must be an object");
  StepVerdicts v;
  auto id = rec.find("question_id");
  if (id == rec.end() || !id->is_string()) {
    throw Error(ErrorCode::kSchemaViolation, "missing string field 'question_id'");
  }
  v.question_id = id->get<std::string>();
  auto rows = rec.find("per_path");
  if (rows == rec.end() || !rows->is_array()) {
    throw Error(ErrorCode::kSchemaViolation, "missing array field 'per_path'");
  }
  for (const auto& row : *rows) {
    if (!row.is_array()) throw Error(ErrorCode::kSchemaViolation, "per_path rows must be arrays");
    std::vector<bool> values;
    for (const auto& cell : row) {
      if (!cell.is_boolean()) throw Error(ErrorCode::kSchemaViolation, "verdicts must be booleans");
      values.push_back(cell.get<bool>());
    }
    v.per_path.push_back(std::move(values));
  }
  if (auto src = rec.find("source"); src != rec.end() && src->is_string()) {
    v.source = parse_verdict_source(src->get<std::string>());
  }
  return v;
}

void check_dimensions(const PathEnsemble& e, const StepVerdicts& v) {
  if (v.per_path.size() != e.path_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "question '" + e.question_id + "': " + std::to_string(v.per_path.size()) +
                    " verdict rows for N=" + std::to_string(e.path_count()));
  }
  for (std::size_t i = 0; i < v.per_path.size(); ++i) {
    if (v.per_path[i].size() != e.step_count()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "question '" + e.question_id + "' path " + std::to_string(i) + ": " +
                      std::to_string(v.per_path[i].size()) + " verdicts for M=" +
                      std::to_string(e.step_count()));
    }
  }
}

std::vector<std::string> real_step_texts(const ReasoningPath& path) {
  std::vector<std::string> texts;
  for (const auto& s : path.steps) {
    if (s.is_pad) break;
    texts.push_back(s.text);
  }
  return texts;
}

}  // namespace

std::string build_backward_verification_prompt(const VerificationRequest& req) {
  auto it = templates().find(req.template_id);
  if (it == templates().end()) {
    throw Error(ErrorCode::kTemplateNotFound, "no prompt template '" + req.template_id + "'");
  }
  if (req.target_step < 1 || req.target_step > req.path_steps.size()) {
    throw Error(ErrorCode::kInvalidTarget,
                "target step " + std::to_string(req.target_step) + " outside 1.." +
                    std::to_string(req.path_steps.size()));
  }
  return it->second(req);
}

ParsedVerdict parse_verdict(std::string_view completion) {
  std::string_view first = completion;
  if (auto end = first.find_first_of(".!?\n"); end != std::string_view::npos) {
    first = first.substr(0, end);
  }
  std::size_t i = 0;
  while (i < first.size() && !std::isalpha(static_cast<unsigned char>(first[i]))) ++i;
  std::size_t j = i;
  while (j < first.size() && std::isalpha(static_cast<unsigned char>(first[j]))) ++j;
  const std::string word = text::to_lower(std::string(first.substr(i, j - i)));

  if (word == "correct" || word == "yes") return {true, false};
  if (word == "incorrect" || word == "no") return {false, false};
  return {false, true};
}

VerdictLoadResult load_oracle_verdicts(std::istream& in, const std::vector<PathEnsemble>& ensembles) {
  std::map<std::string, const PathEnsemble*> by_id;
  for (const auto& e : ensembles) by_id[e.question_id] = &e;

  VerdictLoadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    StepVerdicts v;
    try {
      v = parse_verdict_record(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation,
                  "line " + std::to_string(line_no) + ": malformed record: " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
    auto it = by_id.find(v.question_id);
    if (it == by_id.end()) {
      result.diagnostics.push_back(
          {line_no, "verdicts for unknown question '" + v.question_id + "' skipped"});
      continue;
    }
    check_dimensions(*it->second, v);
    clear_pad_verdicts(*it->second, v);
    if (!result.verdicts.emplace(v.question_id, std::move(v)).second) {
      result.diagnostics.push_back({line_no, "duplicate verdicts ignored"});
    }
  }
  return result;
}

std::string verdicts_to_jsonl(const StepVerdicts& verdicts) {
  json rows = json::array();
  for (const auto& row : verdicts.per_path) {
    json r = json::array();
    for (bool b : row) r.push_back(b);
    rows.push_back(r);
  }
  return json{{"question_id", verdicts.question_id},
              {"per_path", rows},
              {"source", verdict_source_name(verdicts.source)}}
      .dump();
}

void clear_pad_verdicts(const PathEnsemble& ensemble, StepVerdicts& verdicts) {
  for (std::size_t i = 0; i < verdicts.per_path.size() && i < ensemble.paths.size(); ++i) {
    const auto& steps = ensemble.paths[i].steps;
    for (std::size_t j = 0; j < verdicts.per_path[i].size() && j < steps.size(); ++j) {
      if (steps[j].is_pad) verdicts.per_path[i][j] = false;
    }
  }
}

std::string CacheKey::str() const {
  return question_id + "#" + std::to_string(path_index) + "#" + std::to_string(step_index) + "#" +
         template_id + "#" + model_id;
}

void VerdictCache::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::lock_guard lock(mu_);
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto rec = json::parse(line);
      CacheKey key{rec.at("question_id").get<std::string>(), rec.at("path_index").get<std::size_t>(),
                   rec.at("step_index").get<std::size_t>(), rec.at("template_id").get<std::string>(),
                   rec.at("model_id").get<std::string>()};
      entries_[key] = rec.at("verdict").get<bool>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation,
                  "cache line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void VerdictCache::save(std::ostream& out) const {
  std::lock_guard lock(mu_);
  for (const auto& [key, verdict] : entries_) {
    out << json{{"question_id", key.question_id},
                {"path_index", key.path_index},
                {"step_index", key.step_index},
                {"template_id", key.template_id},
                {"model_id", key.model_id},
                {"verdict", verdict}}
               .dump()
        << '\n';
  }
}

std::optional<bool> VerdictCache::lookup(const CacheKey& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void VerdictCache::store(const CacheKey& key, bool verdict) {
  std::lock_guard lock(mu_);
  entries_[key] = verdict;
}

std::size_t VerdictCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::pair<bool, bool> VerdictCache::get_or_produce(const CacheKey& key,
                                                   const std::function<Produced()>& producer) {
  std::promise<bool> promise;
  {
    std::unique_lock lock(mu_);
    if (auto it = entries_.find(key); it != entries_.end()) return {it->second, true};
    if (auto it = in_flight_.find(key); it != in_flight_.end()) {
      auto waiting = it->second;
      lock.unlock();
      return {waiting.get(), true};
    }
    in_flight_.emplace(key, promise.get_future().share());
  }

  Produced produced;
  try {
    produced = producer();
  } catch (...) {
    std::lock_guard lock(mu_);
    in_flight_.erase(key);
    promise.set_exception(std::current_exception());
    throw;
  }
  {
    std::lock_guard lock(mu_);
    if (produced.cacheable) entries_[key] = produced.verdict;
    in_flight_.erase(key);
  }
  promise.set_value(produced.verdict);
  return {produced.verdict, false};
}

VerificationOutcome OracleVerdictSource::verify(const PathEnsemble& ensemble) {
  auto it = table_.find(ensemble.question_id);
  if (it == table_.end()) {
    throw Error(ErrorCode::kOracleMissing, "no oracle verdicts for '" + ensemble.question_id + "'");
  }
  VerificationOutcome out;
  out.verdicts = it->second;
  out.verdicts.source = VerdictSourceKind::kOracle;
  check_dimensions(ensemble, out.verdicts);
  clear_pad_verdicts(ensemble, out.verdicts);
  return out;
}

LlmVerdictSource::LlmVerdictSource(std::shared_ptr<LlmClient> client,
                                   std::shared_ptr<VerdictCache> cache, LlmVerifierOptions options)
    : client_(std::move(client)), cache_(std::move(cache)), options_(std::move(options)) {
  if (!client_) throw Error(ErrorCode::kInvalidArgument, "LLM verdict source needs a client");
  if (!cache_) cache_ = std::make_shared<VerdictCache>();
  if (options_.max_concurrency < 1) options_.max_concurrency = 1;
  if (!templates().contains(options_.template_id)) {
    throw Error(ErrorCode::kTemplateNotFound, "no prompt template '" + options_.template_id + "'");
  }
}

VerificationOutcome LlmVerdictSource::verify(const PathEnsemble& ensemble) {
  struct Task {
    std::size_t path = 0;
    std::size_t step = 0;  // 0-based
  };
  std::vector<Task> tasks;
  std::vector<std::vector<std::string>> step_texts;
  for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
    step_texts.push_back(real_step_texts(ensemble.paths[i]));
    for (std::size_t j = 0; j < step_texts.back().size(); ++j) tasks.push_back({i, j});
  }

  VerificationOutcome out;
  out.verdicts.question_id = ensemble.question_id;
  out.verdicts.source = VerdictSourceKind::kLlm;
  out.verdicts.per_path.assign(ensemble.path_count(), std::vector<bool>(ensemble.step_count(), false));

  std::vector<char> results(tasks.size(), 0);
  std::vector<std::optional<std::string>> notes(tasks.size());
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> hits{0};
  std::atomic<std::size_t> failures{0};

  detail::parallel_for(tasks.size(), options_.max_concurrency, [&](std::size_t t) {
    const auto& task = tasks[t];
    CacheKey key{ensemble.question_id, task.path, task.step + 1, options_.template_id,
                 client_->model_id()};
    auto [verdict, hit] = cache_->get_or_produce(key, [&]() -> VerdictCache::Produced {
      VerificationRequest req;
      req.question = ensemble.question;
      req.path_steps = step_texts[task.path];
      req.target_step = task.step + 1;
      req.template_id = options_.template_id;
      if (const auto& a = ensemble.paths[task.path].steps[task.step].answer) {
        req.target_answer = a->canonical;
      }
      const auto prompt = build_backward_verification_prompt(req);
      ++calls;
      try {
        auto env = client_->complete(prompt, options_.decoding, key.str());
        auto parsed = parse_verdict(env.completion);
        if (parsed.ambiguous) {
          notes[t] = "ambiguous completion for " + key.str() + " treated as incorrect";
        }
        return {parsed.correct, true};
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kAuthError) throw;
        ++failures;
        notes[t] = "verdict for " + key.str() + " unknown, recorded as false: " + e.what();
        return {false, false};
      }
    });
    if (hit) ++hits;
    results[t] = verdict ? 1 : 0;
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    out.verdicts.per_path[tasks[t].path][tasks[t].step] = results[t] != 0;
    if (notes[t]) out.diagnostics.push_back({0, *notes[t]});
  }
  out.endpoint_calls = calls.load();
  out.cache_hits = hits.load();
  out.transport_failures = failures.load();
  return out;
}

VerificationOutcome verify_ensemble(const PathEnsemble& ensemble, VerdictSource& source) {
  auto out = source.verify(ensemble);
  check_dimensions(ensemble, out.verdicts);
  clear_pad_verdicts(ensemble, out.verdicts);
  return out;
}

}  // namespace calib
