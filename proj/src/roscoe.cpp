#include "calib/roscoe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "text_util.hpp"

namespace calib::roscoe {
namespace {

using json = nlohmann::json;

constexpr double kUnitNormTolerance = 1e-6;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kSchemaViolation, message);
}

Vector read_vector(const json& v, const char* field) {
  if (!v.is_array()) invalid(std::string(field) + " must be an array of numbers");
  Vector out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) invalid(std::string(field) + " must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<Vector> read_rows(const json& rec, const char* field) {
  auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) return {};
  if (!it->is_array()) invalid(std::string(field) + " must be an array of arrays");
  std::vector<Vector> rows;
  for (const auto& row : *it) rows.push_back(read_vector(row, field));
  return rows;
}

Vector read_optional_vector(const json& rec, const char* field) {
  auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) return {};
  return read_vector(*it, field);
}

ScoreSidecar parse_sidecar(const json& rec) {
  ScoreSidecar s;
  auto id = rec.find("question_id");
  if (id == rec.end() || !id->is_string()) invalid("missing string field 'question_id'");
  s.question_id = id->get<std::string>();
  auto pi = rec.find("path_index");
  if (pi == rec.end() || !pi->is_number_unsigned()) invalid("missing unsigned field 'path_index'");
  s.path_index = pi->get<std::size_t>();
  s.step_embeddings = read_rows(rec, "step_embeddings");
  s.source_step_embeddings = read_rows(rec, "source_step_embeddings");
  s.path_embedding = read_optional_vector(rec, "path_embedding");
  s.source_embedding = read_optional_vector(rec, "source_embedding");
  s.contradiction_within = read_rows(rec, "contradiction_within");
  s.contradiction_vs_source = read_rows(rec, "contradiction_vs_source");
  s.token_logprobs = read_optional_vector(rec, "token_logprobs");
  if (auto rc = rec.find("real_step_count"); rc != rec.end() && !rc->is_null()) {
    if (!rc->is_number_unsigned()) invalid("real_step_count must be a non-negative integer");
    s.real_step_count = rc->get<std::size_t>();
  }
  return s;
}

void check_unit(const Vector& v, const std::string& what, std::optional<std::size_t> dim) {
  if (dim && v.size() != *dim) {
    invalid(what + " has dimension " + std::to_string(v.size()) + ", header declares " +
            std::to_string(*dim));
  }
  double sq = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) invalid(what + " has a non-finite component");
    sq += x * x;
  }
  if (std::fabs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) invalid(what + " is not unit norm");
}

void check_matrix(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what) {
  if (m.size() != rows) {
    invalid(what + " has " + std::to_string(m.size()) + " rows, expected " + std::to_string(rows));
  }
  for (const auto& row : m) {
    if (row.size() != cols) {
      invalid(what + " row has " + std::to_string(row.size()) + " entries, expected " +
              std::to_string(cols));
    }
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) invalid(what + " entry outside [0, 1]");
    }
  }
}

json rows_to_json(const std::vector<Vector>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back(r);
  return out;
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cosine of vectors with different dimensions");
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double r_align(std::span<const double> step, const std::vector<Vector>& source_steps) {
  if (source_steps.empty()) throw Error(ErrorCode::kEmptySource, "no source steps to align with");
  double best = -1.0;
  for (const auto& s : source_steps) best = std::max(best, cosine(step, s));
  return (1.0 + best) / 2.0;
}

double faithfulness_step(const ScoreSidecar& sidecar) {
  const std::size_t k = std::min(sidecar.real_steps(), sidecar.step_embeddings.size());
  if (k == 0) throw Error(ErrorCode::kNoRealSteps, "path has no real steps");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sum += r_align(sidecar.step_embeddings[i], sidecar.source_step_embeddings);
  }
  return sum / static_cast<double>(k);
}

double informativeness_path(const ScoreSidecar& sidecar) {
  if (sidecar.path_embedding.empty() || sidecar.source_embedding.empty()) {
    throw Error(ErrorCode::kEmptySource, "path or source embedding missing");
  }
  return (1.0 + cosine(sidecar.path_embedding, sidecar.source_embedding)) / 2.0;
}

ConsistencyResult consistency_steps(const ScoreSidecar& sidecar) {
  const std::size_t k = std::min(sidecar.real_steps(), sidecar.contradiction_within.size());
  if (k < 2) return {1.0, true};
  double worst = 0.0;
  for (std::size_t i = 1; i < k; ++i) {
    for (std::size_t j = 0; j < i; ++j) worst = std::max(worst, sidecar.contradiction_within[i][j]);
  }
  return {1.0 - worst, false};
}

double consistency_path(const ScoreSidecar& sidecar) {
  const std::size_t k = std::min(sidecar.real_steps(), sidecar.contradiction_vs_source.size());
  if (k == 0 || sidecar.contradiction_vs_source.front().empty()) {
    throw Error(ErrorCode::kEmptySource, "no step/source contradiction entries");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (double p : sidecar.contradiction_vs_source[i]) worst = std::max(worst, p);
  }
  return 1.0 - worst;
}

double perplexity_path(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) throw Error(ErrorCode::kEmptyTokens, "no token log-probabilities");
  double sum = 0.0;
  for (double lp : token_logprobs) {
    if (lp > 0.0) throw Error(ErrorCode::kPositiveLogProb, "log-probability above zero");
    sum += lp;
  }
  // 1 / exp(-mean) == exp(mean)
  return std::exp(sum / static_cast<double>(token_logprobs.size()));
}

MetricReport compute_report(const ScoreSidecar& sidecar) {
  MetricReport r;
  r.faithfulness_step = faithfulness_step(sidecar);
  r.informativeness_path = informativeness_path(sidecar);
  auto cs = consistency_steps(sidecar);
  r.consistency_steps = cs.value;
  r.single_step = cs.single_step;
  r.consistency_path = consistency_path(sidecar);
  r.perplexity_path = perplexity_path(sidecar.token_logprobs);
  r.step_count = sidecar.real_steps();
  r.token_count = sidecar.token_logprobs.size();
  return r;
}

MetricReport aggregate_metrics(std::span<const MetricReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kEmptyInput, "no metric reports to aggregate");
  MetricReport mean;
  for (const auto& r : reports) {
    mean.faithfulness_step += r.faithfulness_step;
    mean.informativeness_path += r.informativeness_path;
    mean.consistency_steps += r.consistency_steps;
    mean.consistency_path += r.consistency_path;
    mean.perplexity_path += r.perplexity_path;
    mean.step_count += r.step_count;
    mean.token_count += r.token_count;
  }
  const auto n = static_cast<double>(reports.size());
  mean.faithfulness_step /= n;
  mean.informativeness_path /= n;
  mean.consistency_steps /= n;
  mean.consistency_path /= n;
  mean.perplexity_path /= n;
  return mean;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

void validate_sidecar(const ScoreSidecar& s, std::optional<std::size_t> dim) {
  const std::size_t h = s.step_embeddings.size();
  const std::size_t t = s.source_step_embeddings.size();
  if (s.real_step_count && *s.real_step_count > h) invalid("real_step_count exceeds step count");
  for (std::size_t i = 0; i < h; ++i) {
    check_unit(s.step_embeddings[i], "step_embeddings[" + std::to_string(i) + "]", dim);
  }
  for (std::size_t j = 0; j < t; ++j) {
    check_unit(s.source_step_embeddings[j], "source_step_embeddings[" + std::to_string(j) + "]", dim);
  }
  check_unit(s.path_embedding, "path_embedding", dim);
  if (!s.source_embedding.empty()) check_unit(s.source_embedding, "source_embedding", dim);
  check_matrix(s.contradiction_within, h, h, "contradiction_within");
  if (t > 0) {
    check_matrix(s.contradiction_vs_source, h, t, "contradiction_vs_source");
  } else if (!s.contradiction_vs_source.empty() &&
             std::any_of(s.contradiction_vs_source.begin(), s.contradiction_vs_source.end(),
                         [](const Vector& row) { return !row.empty(); })) {
    invalid("contradiction_vs_source present without source steps");
  }
  if (s.token_logprobs.empty()) invalid("token_logprobs is empty");
  for (double lp : s.token_logprobs) {
    if (!(lp <= 0.0) || !std::isfinite(lp)) invalid("token_logprobs must be finite and <= 0");
  }
}

SidecarLoadResult load_sidecars(std::istream& in) {
  SidecarLoadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto rec = json::parse(line);
      if (!rec.is_object()) invalid("record must be an object");
      if (rec.value("record", std::string()) == "header" ||
          (rec.contains("embedding_dim") && !rec.contains("question_id"))) {
        SidecarHeader header;
        header.embedding_dim = rec.at("embedding_dim").get<std::size_t>();
        header.producer = rec.value("producer", std::string());
        result.header = header;
        continue;
      }
      auto sidecar = parse_sidecar(rec);
      validate_sidecar(sidecar, result.header ? std::optional(result.header->embedding_dim)
                                              : std::nullopt);
      if (!sidecar.has_source()) {
        result.diagnostics.push_back(
            {line_no, "question '" + sidecar.question_id + "' path " +
                          std::to_string(sidecar.path_index) + " has no source rationale"});
      }
      result.sidecars.push_back(std::move(sidecar));
    } catch (const json::exception& e) {
      result.diagnostics.push_back({line_no, std::string("malformed sidecar record: ") + e.what()});
    } catch (const Error& e) {
      result.diagnostics.push_back({line_no, e.what()});
    }
  }
  return result;
}

std::string sidecar_to_jsonl(const ScoreSidecar& s) {
  json rec = {{"question_id", s.question_id},
              {"path_index", s.path_index},
              {"step_embeddings", rows_to_json(s.step_embeddings)},
              {"source_step_embeddings", rows_to_json(s.source_step_embeddings)},
              {"path_embedding", s.path_embedding},
              {"source_embedding", s.source_embedding},
              {"contradiction_within", rows_to_json(s.contradiction_within)},
              {"contradiction_vs_source", rows_to_json(s.contradiction_vs_source)},
              {"token_logprobs", s.token_logprobs}};
  if (s.real_step_count) rec["real_step_count"] = *s.real_step_count;
  return rec.dump();
}

std::string header_to_jsonl(const SidecarHeader& header) {
  return json{{"record", "header"}, {"embedding_dim", header.embedding_dim}, {"producer", header.producer}}
      .dump();
}

}  // namespace calib::roscoe
