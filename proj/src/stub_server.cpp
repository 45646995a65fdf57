#include "calib/stub_server.hpp"

#include <cmath>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "calib/answer.hpp"
#include "calib/error.hpp"

namespace calib {
namespace {

using json = nlohmann::json;

std::optional<double> evaluate(double lhs, char op, double rhs) {
  switch (op) {
    case '+': return lhs + rhs;
    case '-': return lhs - rhs;
    case '*':
    case 'x': return lhs * rhs;
    case '/':
      if (rhs == 0.0) return std::nullopt;
      return lhs / rhs;
    default: return std::nullopt;
  }
}

std::string chat_body(const std::string& content) {
  json body = {{"id", "stub"},
               {"object", "chat.completion"},
               {"choices", json::array({{{"index", 0},
                                         {"message", {{"role", "assistant"}, {"content", content}}},
                                         {"finish_reason", "stop"}}})}};
  return body.dump();
}

}  // namespace

StubReply arithmetic_judge(const std::string& prompt, std::size_t) {
  static const std::regex masked_line(R"(with its result masked as X:\n([^\n]*)\n)");
  static const std::regex claim_line(R"(Claimed value: X = ([^\n]+)\n)");
  static const std::regex equation(
      R"((-?[0-9][0-9,]*(?:\.[0-9]+)?)\s*([-+*/x])\s*(-?[0-9][0-9,]*(?:\.[0-9]+)?)\s*=\s*X)");

  std::smatch masked;
  std::smatch claim;
  std::smatch eq;
  if (std::regex_search(prompt, masked, masked_line) && std::regex_search(prompt, claim, claim_line)) {
    const std::string step = masked[1].str();
    if (std::regex_search(step, eq, equation)) {
      auto lhs = find_numeric_spans(eq[1].str());
      auto rhs = find_numeric_spans(eq[3].str());
      auto claimed = find_numeric_spans(claim[1].str());
      if (!lhs.empty() && !rhs.empty() && !claimed.empty()) {
        auto value = evaluate(std::stod(lhs.front().value.canonical), eq[2].str().front(),
                              std::stod(rhs.front().value.canonical));
        if (value) {
          double target = std::stod(claimed.front().value.canonical);
          bool ok = std::fabs(*value - target) <= 1e-9 * std::max(1.0, std::fabs(target));
          return {200, ok ? "Correct. Re-deriving X gives the claimed value."
                          : "Incorrect. Re-deriving X gives a different value."};
        }
      }
    }
  }
  return {200, "The step seems plausible but I cannot re-derive it."};
}

struct StubChatServer::Impl {
  httplib::Server server;
};

StubChatServer::StubChatServer(StubRule rule, std::string prefix)
    : impl_(std::make_unique<Impl>()), prefix_(std::move(prefix)) {
  impl_->server.Post(prefix_ + "/chat/completions",
                     [this, rule = std::move(rule)](const httplib::Request& req,
                                                    httplib::Response& res) {
                       const auto request_no = ++requests_;
                       json doc = json::parse(req.body, nullptr, false);
                       std::string prompt;
                       if (!doc.is_discarded() && doc.contains("messages") &&
                           doc["messages"].is_array() && !doc["messages"].empty()) {
                         prompt = doc["messages"].back().value("content", "");
                       }
                       StubReply reply = rule(prompt, request_no);
                       res.status = reply.status;
                       if (reply.status == 200 && !reply.raw_body) {
                         res.set_content(chat_body(reply.content), "application/json");
                       } else {
                         res.set_content(reply.content, "application/json");
                       }
                     });
}

StubChatServer::~StubChatServer() { stop(); }

void StubChatServer::start(int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else if (impl_->server.bind_to_port("127.0.0.1", port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) throw Error(ErrorCode::kIoError, "stub server could not bind");
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void StubChatServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

void StubChatServer::listen_blocking(const std::string& host, int port) {
  port_ = port;
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::kIoError, "stub server could not listen on " + host + ":" + std::to_string(port));
  }
}

std::string StubChatServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + prefix_;
}

}  // namespace calib
