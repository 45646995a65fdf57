#include "calib/llm_client.hpp"

#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "calib/error.hpp"

namespace calib {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0')
      << ms.count() << 'Z';
  return out.str();
}

bool retryable_status(int status) {
  return status == 0 || status == 408 || status == 429 || (status >= 500 && status < 600);
}

std::optional<std::chrono::milliseconds> retry_after(const HttpReply& reply) {
  for (const auto& [name, value] : reply.headers) {
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower != "retry-after") continue;
    char* end = nullptr;
    double seconds = std::strtod(value.c_str(), &end);
    if (end != value.c_str() && seconds >= 0) {
      return std::chrono::milliseconds(static_cast<long>(seconds * 1000.0));
    }
  }
  return std::nullopt;
}

}  // namespace

HttpTransport::HttpTransport(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  auto scheme_end = base_url_.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint base must include a scheme: " + base_url_);
  }
  auto path_start = base_url_.find('/', scheme_end + 3);
  scheme_host_port_ = base_url_.substr(0, path_start);
  if (path_start != std::string::npos) path_prefix_ = base_url_.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

HttpReply HttpTransport::post_json(const std::string& path, const std::string& body,
                                   const std::vector<std::pair<std::string, std::string>>& headers) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);

  HttpReply reply;
  auto res = client.Post(path_prefix_ + path, h, body, "application/json");
  if (!res) {
    reply.error = httplib::to_string(res.error());
    return reply;
  }
  reply.status = res->status;
  reply.body = res->body;
  for (const auto& [k, v] : res->headers) reply.headers[k] = v;
  return reply;
}

EndpointConfig EndpointConfig::from_env() {
  EndpointConfig cfg;
  if (const char* base = std::getenv("CALIB_LLM_BASE")) cfg.base_url = base;
  if (const char* key = std::getenv("CALIB_LLM_KEY")) cfg.api_key = key;
  return cfg;
}

std::chrono::milliseconds RetryPolicy::delay_for(int retry) const {
  if (retry < 1) return std::chrono::milliseconds(0);
  auto delay = base_delay.count();
  for (int i = 1; i < retry && delay < max_delay.count(); ++i) delay *= 2;
  return std::chrono::milliseconds(std::min<long long>(delay, max_delay.count()));
}

AuditLog::AuditLog(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw Error(ErrorCode::kIoError, "cannot open audit log " + path);
}

void AuditLog::append(const std::string& cache_key, const std::string& prompt,
                      const std::string& completion, std::chrono::milliseconds latency) {
  json rec = {{"timestamp", utc_timestamp()},
              {"cache_key", cache_key},
              {"prompt_hash", sha256_hex(prompt)},
              {"completion", completion},
              {"latency_ms", latency.count()}};
  std::lock_guard lock(mu_);
  out_ << rec.dump() << '\n';
  out_.flush();
}

LlmClient::LlmClient(EndpointConfig endpoint, std::shared_ptr<ChatTransport> transport,
                     RetryPolicy retry, std::shared_ptr<AuditLog> audit, Sleeper sleeper)
    : endpoint_(std::move(endpoint)),
      transport_(std::move(transport)),
      retry_(retry),
      audit_(std::move(audit)),
      sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (!transport_) throw Error(ErrorCode::kInvalidArgument, "no transport configured");
}

LlmClient::LlmClient(EndpointConfig endpoint, RetryPolicy retry, std::shared_ptr<AuditLog> audit)
    : LlmClient(endpoint, std::make_shared<HttpTransport>(endpoint.base_url), retry,
                std::move(audit)) {}

CompletionEnvelope LlmClient::complete(const std::string& prompt, const DecodingParams& params,
                                       const std::string& cache_key) {
  std::vector<std::pair<std::string, std::string>> headers;
  if (!endpoint_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + endpoint_.api_key);
  const std::string body = chat_request_body(endpoint_.model, prompt, params);

  const auto start = Clock::now();
  HttpReply reply;
  int attempt = 0;
  for (;;) {
    ++attempt;
    reply = transport_->post_json("/chat/completions", body, headers);
    if (reply.status == 401 || reply.status == 403) {
      throw Error(ErrorCode::kAuthError, "endpoint rejected credentials (HTTP " +
                                             std::to_string(reply.status) + ")");
    }
    if (reply.status >= 200 && reply.status < 300) break;
    if (!retryable_status(reply.status)) {
      throw Error(ErrorCode::kTransportError,
                  "endpoint returned HTTP " + std::to_string(reply.status));
    }
    if (attempt > retry_.max_retries) {
      if (reply.status == 429) {
        throw Error(ErrorCode::kRateLimited,
                    "rate limited after " + std::to_string(attempt) + " attempts");
      }
      throw Error(ErrorCode::kTransportError,
                  "gave up after " + std::to_string(attempt) + " attempts: " +
                      (reply.status == 0 ? reply.error : "HTTP " + std::to_string(reply.status)));
    }
    auto delay = retry_.delay_for(attempt);
    if (auto hinted = retry_after(reply)) delay = std::min(std::max(delay, *hinted), retry_.max_delay);
    sleeper_(delay);
  }

  CompletionEnvelope env;
  env.prompt = prompt;
  env.completion = parse_chat_response(reply.body);
  env.model_id = endpoint_.model;
  env.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  env.attempts = attempt;
  if (audit_) audit_->append(cache_key, prompt, env.completion, env.latency);
  return env;
}

std::string chat_request_body(const std::string& model, const std::string& prompt,
                              const DecodingParams& params) {
  json req = {{"model", model},
              {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
              {"temperature", params.temperature},
              {"max_tokens", params.max_tokens}};
  return req.dump();
}

std::string parse_chat_response(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kMalformedResponse, "response is not JSON");
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorCode::kMalformedResponse, "content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("missing choices[0].message.content: ") + e.what());
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

}  // namespace calib
