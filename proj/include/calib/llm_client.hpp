#pragma once

#include <chrono>
#include <functional>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "calib/error.hpp"

namespace calib {

/// Raw HTTP exchange. status == 0 means the request never got a response.
struct HttpReply {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
  std::string error;  // transport-level failure description when status == 0
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual HttpReply post_json(const std::string& path, const std::string& body,
                              const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

/// HTTP(S) transport rooted at a base address such as "http://127.0.0.1:8080/v1".
class HttpTransport : public ChatTransport {
 public:
  explicit HttpTransport(std::string base_url,
                         std::chrono::seconds timeout = std::chrono::seconds(60));

  HttpReply post_json(const std::string& path, const std::string& body,
                      const std::vector<std::pair<std::string, std::string>>& headers) override;

  [[nodiscard]] const std::string& base_url() const { return base_url_; }

 private:
  std::string base_url_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::chrono::seconds timeout_;
};

struct EndpointConfig {
  std::string base_url;
  std::string api_key;
  std::string model = "gpt-3.5-turbo";

  /// Reads CALIB_LLM_BASE and CALIB_LLM_KEY. Missing base leaves base_url empty.
  static EndpointConfig from_env();
};

struct DecodingParams {
  double temperature = 0.0;  // verification default; path generation used 0.7
  int max_tokens = 256;
};

struct RetryPolicy {
  int max_retries = 3;  // attempts = max_retries + 1
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};

  /// Backoff before retry number `retry` (1-based): base * 2^(retry-1), capped.
  [[nodiscard]] std::chrono::milliseconds delay_for(int retry) const;
};

struct CompletionEnvelope {
  std::string prompt;
  std::string completion;
  std::string model_id;
  std::chrono::milliseconds latency{0};
  bool cached = false;
  int attempts = 1;
};

/// Append-only JSONL log of completions: {timestamp, cache_key, prompt_hash, completion, latency_ms}.
class AuditLog {
 public:
  explicit AuditLog(const std::string& path);

  void append(const std::string& cache_key, const std::string& prompt,
              const std::string& completion, std::chrono::milliseconds latency);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Chat-completion client with exponential backoff. Retries 408/429/5xx and connection
/// failures; 401/403 fail immediately with AuthError.
class LlmClient {
 public:
  LlmClient(EndpointConfig endpoint, std::shared_ptr<ChatTransport> transport,
            RetryPolicy retry = {}, std::shared_ptr<AuditLog> audit = nullptr,
            Sleeper sleeper = nullptr);

  /// Convenience: HTTP transport built from endpoint.base_url.
  explicit LlmClient(EndpointConfig endpoint, RetryPolicy retry = {},
                     std::shared_ptr<AuditLog> audit = nullptr);

  CompletionEnvelope complete(const std::string& prompt, const DecodingParams& params,
                              const std::string& cache_key = {});

  [[nodiscard]] const std::string& model_id() const { return endpoint_.model; }

 private:
  EndpointConfig endpoint_;
  std::shared_ptr<ChatTransport> transport_;
  RetryPolicy retry_;
  std::shared_ptr<AuditLog> audit_;
  Sleeper sleeper_;
};

/// Request body for the chat-completion protocol.
std::string chat_request_body(const std::string& model, const std::string& prompt,
                              const DecodingParams& params);

/// First choice's message content. Throws MalformedResponse.
std::string parse_chat_response(const std::string& body);

std::string sha256_hex(const std::string& data);

}  // namespace calib
