#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "regula/api.hpp"

namespace regula {

// HTTP/1.1 facade over ApiCore. Shared state is immutable after startup;
// request handling is concurrent (httplib thread pool).
class HttpService {
 public:
  explicit HttpService(ApiCore core) : core_(std::move(core)) { install_routes(); }

  ~HttpService() { stop(); }

  // Binds the given port, or an ephemeral one when port == 0. Returns the
  // bound port once the server accepts connections.
  int start(int port = 0, const std::string& host = "127.0.0.1") {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
      if (port_ < 0) throw std::runtime_error("failed to bind an ephemeral port");
    } else {
      if (!server_.bind_to_port(host, port))
        throw std::runtime_error("failed to bind port " + std::to_string(port));
      port_ = port;
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }
  const ApiCore& core() const { return core_; }

 private:
  void install_routes() {
    auto respond = [](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server_.Post(R"(/api/v([^/]+)/messages/validate)",
                 [this, respond](const httplib::Request& req, httplib::Response& res) {
                   respond(res, handle_post(Endpoint::Validate, req));
                 });
    server_.Post(R"(/api/v([^/]+)/cases/aggregate)",
                 [this, respond](const httplib::Request& req, httplib::Response& res) {
                   respond(res, handle_post(Endpoint::Aggregate, req));
                 });
    server_.Get(R"(/api/v([^/]+)/schema)",
                [this, respond](const httplib::Request& req, httplib::Response& res) {
                  std::string version = req.matches[1];
                  std::string mode = req.get_param_value("mode");
                  if (mode.empty()) mode = "default";
                  respond(res, core_.schema(version, mode));
                });
  }

  ApiResponse handle_post(Endpoint endpoint, const httplib::Request& req) {
    std::string version = req.matches[1];
    std::string mode_text = req.get_param_value("mode");
    if (mode_text.empty()) mode_text = "default";
    auto mode = schema_mode_from(mode_text);
    if (!mode)
      return {400, nlohmann::json{{"error", "unknown-mode"}, {"mode", mode_text}}};
    return core_.post(endpoint, version, *mode, req.body);
  }

  ApiCore core_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace regula
