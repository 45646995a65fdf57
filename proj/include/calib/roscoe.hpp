#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calib/error.hpp"

namespace calib::roscoe {

using Vector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;

/// Model-derived inputs for one (question, path) pair. Step-indexed fields cover the
/// path's real steps; `real_step_count` may trim trailing rows when a producer emitted
/// placeholders for pad steps.
struct ScoreSidecar {
  std::string question_id;
  std::size_t path_index = 0;
  std::vector<Vector> step_embeddings;         // h_i, unit norm
  std::vector<Vector> source_step_embeddings;  // s_j, unit norm
  Vector path_embedding;                       // h
  Vector source_embedding;                     // s
  Matrix contradiction_within;                 // [i][j] = p_contr(h_i, h_j)
  Matrix contradiction_vs_source;              // [i][j] = p_contr(h_i, s_j)
  std::vector<double> token_logprobs;          // natural log, <= 0
  std::optional<std::size_t> real_step_count;

  [[nodiscard]] std::size_t real_steps() const {
    return real_step_count.value_or(step_embeddings.size());
  }
  [[nodiscard]] bool has_source() const {
    return !source_step_embeddings.empty() && !source_embedding.empty();
  }
};

struct MetricReport {
  double faithfulness_step = 0.0;
  double informativeness_path = 0.0;
  double consistency_steps = 0.0;
  double consistency_path = 0.0;
  double perplexity_path = 0.0;
  std::size_t step_count = 0;
  std::size_t token_count = 0;
  bool single_step = false;  // consistency_steps defaulted to 1.0
};

double cosine(std::span<const double> u, std::span<const double> v);

/// (1 + max_j cos(h_i, s_j)) / 2.
double r_align(std::span<const double> step, const std::vector<Vector>& source_steps);

double faithfulness_step(const ScoreSidecar& sidecar);
double informativeness_path(const ScoreSidecar& sidecar);

struct ConsistencyResult {
  double value = 1.0;
  bool single_step = false;
};

/// 1 - max over real-step pairs j < i of p_contr(h_i, h_j). A single step has no pair and
/// scores 1.0 with `single_step` set.
ConsistencyResult consistency_steps(const ScoreSidecar& sidecar);

double consistency_path(const ScoreSidecar& sidecar);

/// 1 / PPL with PPL = exp(-mean(logprobs)).
double perplexity_path(std::span<const double> token_logprobs);

MetricReport compute_report(const ScoreSidecar& sidecar);

/// Unweighted mean of every metric. Throws EmptyInput.
MetricReport aggregate_metrics(std::span<const MetricReport> reports);

/// Percentage with two decimals: 0.4567 -> "45.67".
std::string format_percent(double fraction);

struct SidecarHeader {
  std::size_t embedding_dim = 0;
  std::string producer;
};

struct SidecarLoadResult {
  std::optional<SidecarHeader> header;
  std::vector<ScoreSidecar> sidecars;
  std::vector<Diagnostic> diagnostics;
};

/// Validates every record (unit-norm embeddings within 1e-6, probabilities in [0, 1],
/// consistent matrix shapes, non-empty log-probabilities) and skips invalid ones with a
/// diagnostic. Records with empty source fields load and are flagged by has_source().
SidecarLoadResult load_sidecars(std::istream& in);

/// Throws SchemaViolation describing the first broken invariant.
void validate_sidecar(const ScoreSidecar& sidecar, std::optional<std::size_t> embedding_dim = {});

std::string sidecar_to_jsonl(const ScoreSidecar& sidecar);
std::string header_to_jsonl(const SidecarHeader& header);

}  // namespace calib::roscoe
