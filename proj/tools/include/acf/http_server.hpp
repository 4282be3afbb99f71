#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "acf/service.hpp"

namespace acf {

/// Serves a Service over HTTP: every /v1 route is forwarded to
/// Service::handle, and `static_dir` (if set) is mounted at "/".
class HttpServer {
 public:
  explicit HttpServer(Service& service, std::filesystem::path static_dir = {});
  ~HttpServer();

  /// Binds to host:port (port 0 picks a free one); returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace acf
