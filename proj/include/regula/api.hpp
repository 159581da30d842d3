#pragma once

#include <atomic>
#include <optional>
#include <string>

#include <json.hpp>

#include "regula/errors.hpp"
#include "regula/ruleset.hpp"
#include "regula/schema.hpp"

namespace regula {

enum class Endpoint { Validate, Aggregate };

inline const char* endpoint_name(Endpoint e) {
  return e == Endpoint::Validate ? "validate" : "aggregate";
}

inline std::string endpoint_path(Endpoint e, const std::string& version) {
  return "/api/v" + version +
         (e == Endpoint::Validate ? "/messages/validate" : "/cases/aggregate");
}

inline RuleKind endpoint_rule_kind(Endpoint e) {
  return e == Endpoint::Validate ? RuleKind::Validation : RuleKind::Aggregation;
}

struct ApiResponse {
  int status = 0;
  nlohmann::json body;
};

// Config-gated fault injection, disabled by default. When enabled, a request
// whose counter-derived draw falls under `probability` (and whose endpoint
// matches) fails with a synthetic harness error. The draw is seeded from
// (service seed, request counter) so runs stay reproducible.
struct InjectProfile {
  std::string name = "default";
  double probability = 0.0;
  std::string endpoint = "any";  // "validate", "aggregate", or "any"
};

inline nlohmann::json outcome_entry_to_json(const OutcomeEntry& e) {
  nlohmann::json out;
  out["rule"] = e.rule;
  if (e.result) out["result"] = rule_result_name(*e.result);
  if (e.has_output) {
    if (e.output) {
      const Literal& l = *e.output;
      switch (l.kind) {
        case Literal::Kind::Code: out["output"] = l.code; break;
        case Literal::Kind::Integer: out["output"] = l.number; break;
        case Literal::Kind::Date: out["output"] = format_date(l.date); break;
      }
    } else {
      out["output"] = nullptr;
    }
  }
  return out;
}

// The engine part of GURI's HTTP facade, independent of transport. The HTTP
// server and the in-process client both delegate here, so replaying a suite
// in-process and over HTTP exercises identical semantics.
class ApiCore {
 public:
  ApiCore(VersionRegistry versions, VariableRegistry registry, std::uint64_t seed = 0,
          std::optional<InjectProfile> inject = std::nullopt)
      : versions_(std::move(versions)),
        registry_(std::move(registry)),
        seed_(seed),
        inject_(std::move(inject)) {}

  ApiCore(ApiCore&& other) noexcept
      : versions_(std::move(other.versions_)),
        registry_(std::move(other.registry_)),
        seed_(other.seed_),
        inject_(std::move(other.inject_)),
        request_counter_(other.request_counter_.load()) {}

  const VariableRegistry& registry() const { return registry_; }
  const VersionRegistry& versions() const { return versions_; }

  ApiResponse post(Endpoint endpoint, const std::string& version_id, SchemaMode mode,
                   const std::string& body_text) const {
    const RuleSetVersion* version = versions_.find(version_id);
    if (!version)
      return {404, nlohmann::json{{"error", "unknown-version"}, {"version", version_id}}};

    nlohmann::json body;
    try {
      body = nlohmann::json::parse(body_text);
    } catch (const nlohmann::json::exception&) {
      return {400, nlohmann::json{{"error", "malformed-json"}}};
    }

    RecordValidation rv = validate_record_json(body, registry_, mode);
    if (!rv.ok())
      return {400, nlohmann::json{{"error", "schema-violation"}, {"violations", rv.violations}}};

    if (inject_ && inject_->probability > 0) {
      std::uint64_t n = request_counter_.fetch_add(1);
      if (inject_->endpoint == "any" || inject_->endpoint == endpoint_name(endpoint)) {
        Rng draw(derive_seed(seed_, "fault-injection", n));
        if (draw.chance(inject_->probability)) {
          ErrorSignature sig{{{"fault-injector", "inject", inject_->name},
                              {"rules-service", endpoint_name(endpoint), version_id}}};
          return error_response(sig);
        }
      }
    }

    OutcomeVector outcomes = run_all(*version, rv.record, endpoint_rule_kind(endpoint));
    for (const auto& entry : outcomes) {
      if (entry.error) {
        ErrorSignature sig{{{"rule-engine", eval_error_operation(entry.error->kind),
                             entry.error->detail},
                            {"rule-engine", "eval-rule", entry.rule},
                            {"rules-service", endpoint_name(endpoint), version_id}}};
        return error_response(sig);
      }
    }

    nlohmann::json entries = nlohmann::json::array();
    for (const auto& entry : outcomes) entries.push_back(outcome_entry_to_json(entry));
    return {200, nlohmann::json{{"version", version_id},
                                {"kind", rule_kind_name(endpoint_rule_kind(endpoint))},
                                {"outcomes", std::move(entries)}}};
  }

  ApiResponse schema(const std::string& version_id, const std::string& mode_text) const {
    auto mode = schema_mode_from(mode_text);
    if (!mode) return {400, nlohmann::json{{"error", "unknown-mode"}, {"mode", mode_text}}};
    if (!versions_.find(version_id))
      return {404, nlohmann::json{{"error", "unknown-version"}, {"version", version_id}}};
    return {200, schema_document(registry_, version_id, *mode)};
  }

 private:
  static ApiResponse error_response(const ErrorSignature& sig) {
    ErrorClassification cls = classify_error(sig);
    return {500, nlohmann::json{{"signature", error_signature_to_json(sig)},
                                {"category", error_category_name(cls.category)}}};
  }

  VersionRegistry versions_;
  VariableRegistry registry_;
  std::uint64_t seed_;
  std::optional<InjectProfile> inject_;
  mutable std::atomic<std::uint64_t> request_counter_{0};
};

inline ApiCore make_api_core(const std::string& manifest_path, std::uint64_t seed = 0,
                             std::optional<InjectProfile> inject = std::nullopt) {
  Manifest manifest = load_manifest(manifest_path);
  VariableRegistry registry = load_registry(manifest);
  VersionRegistry versions = VersionRegistry::load_all(manifest, registry);
  return ApiCore(std::move(versions), std::move(registry), seed, std::move(inject));
}

}  // namespace regula
