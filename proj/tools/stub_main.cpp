// Local chat-completion endpoint that judges masked arithmetic steps. For demos and tests.
#include <iostream>

#include <CLI11.hpp>

#include "calib/stub_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Arithmetic-judge chat-completion stub", "calib-stub"};
  std::string host = "127.0.0.1";
  int port = 8089;
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  calib::StubChatServer server;
  std::cout << "listening on http://" << host << ':' << port << "/v1" << std::endl;
  server.listen_blocking(host, port);
  return 0;
}
