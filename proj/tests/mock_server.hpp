#pragma once

// In-process HTTP server on an ephemeral loopback port.

#include <httplib.h>

#include "toolrm/json.hpp"

#include <string>
#include <thread>
#include <vector>

namespace testing {

struct MockServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  /// Register handlers on `server` before calling start().
  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  std::string url(const std::string& path = "") const { return "http://127.0.0.1:" + std::to_string(port) + path; }
  ~MockServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

inline std::string chat_reply(const std::vector<std::string>& contents) {
  std::string body = "{\"choices\": [";
  for (std::size_t i = 0; i < contents.size(); ++i) {
    if (i) body += ",";
    toolrm::Json c = {{"index", i}, {"message", {{"role", "assistant"}, {"content", contents[i]}}}};
    body += c.dump();
  }
  return body + "]}";
}

}  // namespace testing
