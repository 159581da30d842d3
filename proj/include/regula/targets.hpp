#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "regula/api.hpp"
#include "regula/client.hpp"

namespace regula {

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Coverable unit: an (endpoint, status-class) pair or a (rule, result) pair.
struct Target {
  enum class Kind { EndpointStatus, RuleResultPair };
  Kind kind = Kind::EndpointStatus;
  Endpoint endpoint = Endpoint::Validate;
  int status_class = 2;  // 2, 4, or 5
  std::string rule;
  RuleResult result = RuleResult::Pass;

  std::string key() const {
    if (kind == Kind::EndpointStatus)
      return std::string("endpoint:") + endpoint_name(endpoint) + ":" +
             std::to_string(status_class) + "xx";
    return "pair:" + rule + ":" + rule_result_name(result);
  }
};

// Full target extraction: the endpoint-status target is always present; a
// 200 additionally yields one rule-result pair per outcome entry. Strategies
// that only track endpoint-status targets filter afterwards.
inline std::vector<Target> extract_targets(const ClientResponse& response, Endpoint endpoint) {
  std::vector<Target> out;
  if (response.transport_failed()) return out;
  int cls = response.status / 100;
  if (cls != 2 && cls != 4 && cls != 5)
    throw ExtractionError("unexpected status " + std::to_string(response.status));
  Target es;
  es.kind = Target::Kind::EndpointStatus;
  es.endpoint = endpoint;
  es.status_class = cls;
  out.push_back(es);
  if (cls != 2) return out;
  if (!response.body.is_object() || !response.body.contains("outcomes") ||
      !response.body["outcomes"].is_array())
    throw ExtractionError("200 response body without an outcomes array");
  for (const auto& entry : response.body["outcomes"]) {
    if (!entry.is_object() || !entry.contains("rule") || !entry.contains("result"))
      throw ExtractionError("malformed outcome entry");
    auto result = rule_result_from(entry["result"].get<std::string>());
    if (!result) throw ExtractionError("unknown result '" + entry["result"].get<std::string>() + "'");
    Target t;
    t.kind = Target::Kind::RuleResultPair;
    t.rule = entry["rule"].get<std::string>();
    t.result = *result;
    out.push_back(std::move(t));
  }
  return out;
}

// A retained test with its regression oracle, recorded against the
// unmutated engine at generation time.
struct TestCase {
  Endpoint endpoint = Endpoint::Validate;
  std::string version;
  nlohmann::json body;
  int oracle_status = 0;
  nlohmann::json oracle_outcomes;        // array; empty unless the oracle is a 200
  std::vector<std::string> covers;       // all targets this test exhibits
  std::vector<std::string> new_covers;   // targets first covered by this test
};

struct Archive {
  std::vector<TestCase> retained;
  std::set<std::string> covered;                    // strategy-universe targets seen
  std::map<std::string, size_t> first_coverer;      // target key -> retained index
};

struct CampaignLogEntry {
  int index = 0;
  Endpoint endpoint = Endpoint::Validate;
  int status = 0;
  std::vector<std::string> targets_new;
  nlohmann::json outcomes;                 // array; empty unless status 200
  std::optional<nlohmann::json> error;     // 500 signature document or transport error
};

inline nlohmann::json log_entry_to_json(const CampaignLogEntry& e) {
  nlohmann::json out;
  out["index"] = e.index;
  out["endpoint"] = endpoint_name(e.endpoint);
  out["status"] = e.status;
  out["targets-new"] = e.targets_new;
  out["outcomes"] = e.outcomes.is_array() ? e.outcomes : nlohmann::json::array();
  if (e.error) out["error"] = *e.error;
  return out;
}

}  // namespace regula
