#pragma once

#include <string>

#include <httplib.h>

#include "regula/client.hpp"

namespace regula {

class HttpClient final : public ServiceClient {
 public:
  HttpClient(const std::string& host, int port) : client_(host, port) {
    client_.set_connection_timeout(5, 0);
    client_.set_read_timeout(30, 0);
  }

  ClientResponse post_record(Endpoint endpoint, const std::string& version, SchemaMode mode,
                             const nlohmann::json& record_body) override {
    std::string path = endpoint_path(endpoint, version);
    path += "?mode=";
    path += schema_mode_name(mode);
    auto res = client_.Post(path, record_body.dump(), "application/json");
    if (!res) return {0, nlohmann::json(), httplib::to_string(res.error())};
    ClientResponse out;
    out.status = res->status;
    try {
      out.body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      out.body = nlohmann::json();
      out.transport_error = std::string("unparseable body: ") + e.what();
    }
    return out;
  }

 private:
  httplib::Client client_;
};

}  // namespace regula
