#pragma once

#include <string>

#include <json.hpp>

#include "regula/api.hpp"

namespace regula {

// Transport-level response. status 0 means the request never produced an
// HTTP response (connection refused, broken pipe, ...).
struct ClientResponse {
  int status = 0;
  nlohmann::json body;
  std::string transport_error;

  bool transport_failed() const { return status == 0; }
};

class ServiceClient {
 public:
  virtual ~ServiceClient() = default;
  virtual ClientResponse post_record(Endpoint endpoint, const std::string& version,
                                     SchemaMode mode, const nlohmann::json& record_body) = 0;
};

class InProcessClient final : public ServiceClient {
 public:
  explicit InProcessClient(const ApiCore& core) : core_(&core) {}

  ClientResponse post_record(Endpoint endpoint, const std::string& version, SchemaMode mode,
                             const nlohmann::json& record_body) override {
    ApiResponse r = core_->post(endpoint, version, mode, record_body.dump());
    return {r.status, r.body, ""};
  }

 private:
  const ApiCore* core_;
};

}  // namespace regula
