#pragma once

#include <cstddef>
#include <future>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "calib/ensemble.hpp"
#include "calib/error.hpp"
#include "calib/llm_client.hpp"
#include "calib/verdicts.hpp"

namespace calib {

inline constexpr const char* kDefaultTemplateId = "backward-v1";

struct VerificationRequest {
  std::string question;
  std::vector<std::string> path_steps;  // real steps only
  std::size_t target_step = 1;          // 1-based
  std::string template_id = kDefaultTemplateId;
  std::optional<std::string> target_answer;  // the step's derived quantity, when known
};

/// Renders the backward-verification prompt: the earlier steps, the target step with its
/// derived quantity masked as X, the claimed value, and an instruction to re-derive X and
/// answer starting with "correct" or "incorrect". Identical requests give identical bytes.
/// Throws TemplateNotFound, InvalidTarget.
std::string build_backward_verification_prompt(const VerificationRequest& req);

struct ParsedVerdict {
  bool correct = false;
  bool ambiguous = false;
};

/// Reads the leading word of the first sentence: correct/yes -> true, incorrect/no -> false,
/// anything else -> false and flagged ambiguous.
ParsedVerdict parse_verdict(std::string_view completion);

struct VerdictLoadResult {
  std::map<std::string, StepVerdicts> verdicts;
  std::vector<Diagnostic> diagnostics;
};

/// Loads verdict records and validates them against the companion ensembles: unknown
/// questions are skipped with a diagnostic, pad-step verdicts are forced false.
/// Throws DimensionMismatch when a known question's table has the wrong N or M, and
/// SchemaViolation for malformed records.
VerdictLoadResult load_oracle_verdicts(std::istream& in, const std::vector<PathEnsemble>& ensembles);

std::string verdicts_to_jsonl(const StepVerdicts& verdicts);

/// Forces every pad-step verdict to false.
void clear_pad_verdicts(const PathEnsemble& ensemble, StepVerdicts& verdicts);

struct CacheKey {
  std::string question_id;
  std::size_t path_index = 0;
  std::size_t step_index = 1;
  std::string template_id;
  std::string model_id;

  [[nodiscard]] std::string str() const;
  friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

/// Verdict cache with per-key single flight: concurrent lookups of one missing key run the
/// producer once. Optionally persisted as JSONL.
class VerdictCache {
 public:
  struct Produced {
    bool verdict = false;
    bool cacheable = true;
  };

  VerdictCache() = default;

  void load(std::istream& in);
  void save(std::ostream& out) const;

  [[nodiscard]] std::optional<bool> lookup(const CacheKey& key) const;
  void store(const CacheKey& key, bool verdict);

  /// Returns {verdict, hit}.
  std::pair<bool, bool> get_or_produce(const CacheKey& key, const std::function<Produced()>& producer);

  [[nodiscard]] std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<CacheKey, bool> entries_;
  std::map<CacheKey, std::shared_future<bool>> in_flight_;
};

struct VerificationOutcome {
  StepVerdicts verdicts;
  std::vector<Diagnostic> diagnostics;
  std::size_t endpoint_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t transport_failures = 0;  // verdicts recorded as false after the retry budget ran out
};

class VerdictSource {
 public:
  virtual ~VerdictSource() = default;
  virtual VerificationOutcome verify(const PathEnsemble& ensemble) = 0;
};

class OracleVerdictSource : public VerdictSource {
 public:
  explicit OracleVerdictSource(std::map<std::string, StepVerdicts> table) : table_(std::move(table)) {}
  VerificationOutcome verify(const PathEnsemble& ensemble) override;

 private:
  std::map<std::string, StepVerdicts> table_;
};

struct LlmVerifierOptions {
  std::string template_id = kDefaultTemplateId;
  DecodingParams decoding{};
  std::size_t max_concurrency = 4;
};

/// One chat-completion call per (path, real step), run under a bounded concurrency budget.
/// Transport failures after retries yield a false verdict plus a diagnostic and are not cached.
class LlmVerdictSource : public VerdictSource {
 public:
  LlmVerdictSource(std::shared_ptr<LlmClient> client, std::shared_ptr<VerdictCache> cache,
                   LlmVerifierOptions options = {});
  VerificationOutcome verify(const PathEnsemble& ensemble) override;

 private:
  std::shared_ptr<LlmClient> client_;
  std::shared_ptr<VerdictCache> cache_;
  LlmVerifierOptions options_;
};

VerificationOutcome verify_ensemble(const PathEnsemble& ensemble, VerdictSource& source);

}  // namespace calib
