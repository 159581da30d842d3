#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "regula/engine.hpp"
#include "regula/parser.hpp"
#include "regula/registry.hpp"

namespace regula {

struct RuleSetVersion {
  std::string id;
  std::string date;  // ISO-8601, informational
  std::vector<ValidationRule> validation;
  std::vector<AggregationRule> aggregation;
};

struct ManifestVersion {
  std::string id;
  std::string date;
  std::vector<std::string> files;  // relative to the manifest directory
  size_t declared_validation = 0;
  size_t declared_aggregation = 0;
};

struct Manifest {
  std::string base_dir;
  std::string registry_file;
  std::vector<ManifestVersion> versions;

  const ManifestVersion* find(const std::string& id) const {
    for (const auto& v : versions)
      if (v.id == id) return &v;
    return nullptr;
  }
};

inline Manifest load_manifest(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("manifest " + path + ": " + e.what());
  }
  Manifest m;
  m.base_dir = std::filesystem::path(path).parent_path().string();
  if (m.base_dir.empty()) m.base_dir = ".";
  m.registry_file = doc.value("registry", "variables.json");
  if (!doc.contains("versions") || !doc["versions"].is_array())
    throw LoadError("manifest " + path + ": missing versions array");
  for (const auto& v : doc["versions"]) {
    ManifestVersion mv;
    mv.id = v.at("id").get<std::string>();
    mv.date = v.value("date", "");
    for (const auto& f : v.at("files")) mv.files.push_back(f.get<std::string>());
    if (v.contains("rules")) {
      mv.declared_validation = v["rules"].value("validation", 0u);
      mv.declared_aggregation = v["rules"].value("aggregation", 0u);
    }
    m.versions.push_back(std::move(mv));
  }
  return m;
}

inline VariableRegistry load_registry(const Manifest& m) {
  return load_variable_registry((std::filesystem::path(m.base_dir) / m.registry_file).string());
}

// Loads and fully validates one version: every member file parses, every
// rule is reference-valid, ids are unique, and the rule counts match the
// manifest declaration.
inline RuleSetVersion load_ruleset_version(const Manifest& manifest, const std::string& version_id,
                                           const VariableRegistry& registry) {
  const ManifestVersion* mv = manifest.find(version_id);
  if (!mv) throw LoadError("unknown version '" + version_id + "'");
  RuleSetVersion out;
  out.id = mv->id;
  out.date = mv->date;
  std::set<std::string> ids;
  for (const auto& file : mv->files) {
    std::string full = (std::filesystem::path(manifest.base_dir) / file).string();
    std::vector<Rule> rules;
    try {
      rules = parse_rules(read_text_file(full));
    } catch (const ParseError& e) {
      throw LoadError("rule file " + file + ": " + e.what());
    }
    for (auto& r : rules) {
      const std::string& id = rule_id(r);
      if (!ids.insert(id).second)
        throw LoadError("rule file " + file + ": duplicate rule id '" + id + "'");
      auto unknown = validate_references(r, registry);
      if (!unknown.empty()) {
        std::string names;
        for (const auto& n : unknown) names += (names.empty() ? "" : ", ") + n;
        throw LoadError("rule '" + id + "' in " + file + " references unknown variables: " +
                        names);
      }
      if (auto* vr = std::get_if<ValidationRule>(&r))
        out.validation.push_back(std::move(*vr));
      else
        out.aggregation.push_back(std::move(std::get<AggregationRule>(r)));
    }
  }
  if (mv->declared_validation && out.validation.size() != mv->declared_validation)
    throw LoadError("version '" + version_id + "': manifest declares " +
                    std::to_string(mv->declared_validation) + " validation rules, found " +
                    std::to_string(out.validation.size()));
  if (mv->declared_aggregation && out.aggregation.size() != mv->declared_aggregation)
    throw LoadError("version '" + version_id + "': manifest declares " +
                    std::to_string(mv->declared_aggregation) + " aggregation rules, found " +
                    std::to_string(out.aggregation.size()));
  return out;
}

// One entry per rule of the requested kind, in manifest order. Pure.
inline OutcomeVector run_all(const RuleSetVersion& version, const Record& record, RuleKind kind) {
  OutcomeVector out;
  if (kind == RuleKind::Validation) {
    out.reserve(version.validation.size());
    for (const auto& rule : version.validation) {
      RuleEvaluation ev = eval_validation(rule, record);
      out.push_back({rule.id, ev.result, ev.error, false, std::nullopt});
    }
  } else {
    out.reserve(version.aggregation.size());
    for (const auto& rule : version.aggregation) {
      RuleEvaluation ev = eval_aggregation(rule, record);
      out.push_back({rule.id, ev.result, ev.error, ev.has_output, ev.output});
    }
  }
  return out;
}

// Versions are registered at startup and immutable afterwards.
class VersionRegistry {
 public:
  VersionRegistry() = default;

  static VersionRegistry load_all(const Manifest& manifest, const VariableRegistry& registry) {
    VersionRegistry out;
    for (const auto& mv : manifest.versions)
      out.versions_[mv.id] = load_ruleset_version(manifest, mv.id, registry);
    return out;
  }

  const RuleSetVersion* find(const std::string& id) const {
    auto it = versions_.find(id);
    return it == versions_.end() ? nullptr : &it->second;
  }

  void put(RuleSetVersion v) { versions_[v.id] = std::move(v); }

  const std::map<std::string, RuleSetVersion>& all() const { return versions_; }

 private:
  std::map<std::string, RuleSetVersion> versions_;
};

}  // namespace regula
