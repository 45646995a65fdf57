#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>

namespace calib {

struct StubReply {
  int status = 200;
  std::string content;  // message content for 200 replies, raw body otherwise
  bool raw_body = false;
};

/// Maps (prompt, request number starting at 1) to a reply.
using StubRule = std::function<StubReply(const std::string& prompt, std::size_t request_no)>;

/// Scripted backward-verification judge. Reads the masked step "a op b = X" and the
/// claimed value from a backward-v1 prompt: "Correct." when the arithmetic holds,
/// "Incorrect." when it does not, and a noncommittal sentence when the step has no
/// checkable equation.
StubReply arithmetic_judge(const std::string& prompt, std::size_t request_no);

/// In-process chat-completion endpoint on 127.0.0.1 serving POST {prefix}/chat/completions.
class StubChatServer {
 public:
  explicit StubChatServer(StubRule rule = arithmetic_judge, std::string prefix = "/v1");
  ~StubChatServer();

  StubChatServer(const StubChatServer&) = delete;
  StubChatServer& operator=(const StubChatServer&) = delete;

  /// Binds to `port` (0 picks a free one) and serves on a background thread.
  void start(int port = 0);
  void stop();
  /// Blocks serving on the calling thread.
  void listen_blocking(const std::string& host, int port);

  [[nodiscard]] int port() const { return port_; }
  [[nodiscard]] std::string base_url() const;
  [[nodiscard]] std::size_t request_count() const { return requests_.load(); }
  void reset_count() { requests_ = 0; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string prefix_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace calib
