#include "acf/http_server.hpp"

#include <httplib.h>

namespace acf {

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    r.body = req.body;
    const Response out = impl_->service.handle(r);
    res.status = out.status;
    res.set_content(out.payload(), out.content_type);
  };
  impl_->server.Get(R"(/v1/.*)", forward);
  impl_->server.Post(R"(/v1/.*)", forward);
  if (!static_dir.empty()) impl_->server.set_mount_point("/", static_dir.string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace acf
