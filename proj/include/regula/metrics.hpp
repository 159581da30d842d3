#pragma once

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "regula/errors.hpp"
#include "regula/ruleset.hpp"
#include "regula/targets.hpp"

namespace regula {

inline constexpr std::array<RuleResult, 4> kAllResults = {
    RuleResult::Pass, RuleResult::Fail, RuleResult::Warning, RuleResult::NotApplied};

inline size_t result_index(RuleResult r) { return static_cast<size_t>(r); }

// Per (rule, result) execution counts, derived solely from 200-response
// outcome entries. A rule executed with result X means count(rule, X) >= 1.
struct RuleResultCounts {
  std::map<std::string, std::array<std::uint64_t, 4>> counts;

  bool executed(const std::string& rule, RuleResult r) const {
    auto it = counts.find(rule);
    return it != counts.end() && it->second[result_index(r)] > 0;
  }

  std::uint64_t count(const std::string& rule, RuleResult r) const {
    auto it = counts.find(rule);
    return it == counts.end() ? 0 : it->second[result_index(r)];
  }

  // Number of distinct rules executed at least once with the given result.
  size_t rules_with(RuleResult r) const {
    size_t n = 0;
    for (const auto& [rule, c] : counts)
      if (c[result_index(r)] > 0) ++n;
    return n;
  }
};

inline void accumulate_log_entry(RuleResultCounts& counts, const CampaignLogEntry& entry) {
  if (entry.status != 200 || !entry.outcomes.is_array()) return;
  for (const auto& outcome : entry.outcomes) {
    if (!outcome.contains("rule") || !outcome.contains("result")) continue;
    auto result = rule_result_from(outcome["result"].get<std::string>());
    if (!result) continue;
    auto& slot = counts.counts[outcome["rule"].get<std::string>()];
    ++slot[result_index(*result)];
  }
}

inline RuleResultCounts rules_results_report(const std::vector<CampaignLogEntry>& log) {
  RuleResultCounts counts;
  for (const auto& entry : log) accumulate_log_entry(counts, entry);
  return counts;
}

// Per-rule result-type distribution, fractions summing to 1. Rules that were
// never executed are excluded and listed under `omitted`.
struct FrequencyProfile {
  std::map<std::string, std::array<double, 4>> fractions;
  std::vector<std::string> omitted;
};

inline FrequencyProfile frequency_profile(const RuleResultCounts& counts,
                                          const std::vector<std::string>& all_rules = {}) {
  FrequencyProfile profile;
  std::set<std::string> seen;
  for (const auto& [rule, c] : counts.counts) {
    std::uint64_t total = 0;
    for (auto n : c) total += n;
    if (total == 0) continue;
    std::array<double, 4> f{};
    for (size_t i = 0; i < 4; ++i)
      f[i] = static_cast<double>(c[i]) / static_cast<double>(total);
    profile.fractions[rule] = f;
    seen.insert(rule);
  }
  for (const auto& rule : all_rules)
    if (!seen.count(rule)) profile.omitted.push_back(rule);
  return profile;
}

struct BaselineComparison {
  std::array<double, 4> mean_absolute_difference{};
  size_t compared_rules = 0;
};

inline BaselineComparison compare_to_baseline(const FrequencyProfile& profile,
                                              const FrequencyProfile& baseline) {
  BaselineComparison out;
  std::array<double, 4> sums{};
  for (const auto& [rule, f] : profile.fractions) {
    auto it = baseline.fractions.find(rule);
    if (it == baseline.fractions.end()) continue;
    for (size_t i = 0; i < 4; ++i) sums[i] += std::fabs(f[i] - it->second[i]);
    ++out.compared_rules;
  }
  if (out.compared_rules)
    for (size_t i = 0; i < 4; ++i)
      out.mean_absolute_difference[i] = sums[i] / static_cast<double>(out.compared_rules);
  return out;
}

inline nlohmann::json frequency_profile_to_json(const FrequencyProfile& profile) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& [rule, f] : profile.fractions) {
    rules.push_back(nlohmann::json{{"rule", rule},
                                   {"pass", f[0]},
                                   {"fail", f[1]},
                                   {"warning", f[2]},
                                   {"notApplied", f[3]}});
  }
  nlohmann::json out{{"rules", std::move(rules)}};
  if (!profile.omitted.empty()) out["omitted"] = profile.omitted;
  return out;
}

inline FrequencyProfile frequency_profile_from_json(const nlohmann::json& doc) {
  FrequencyProfile profile;
  for (const auto& item : doc.at("rules")) {
    std::array<double, 4> f{};
    f[0] = item.value("pass", 0.0);
    f[1] = item.value("fail", 0.0);
    f[2] = item.value("warning", 0.0);
    f[3] = item.value("notApplied", 0.0);
    profile.fractions[item.at("rule").get<std::string>()] = f;
  }
  if (doc.contains("omitted"))
    for (const auto& r : doc["omitted"]) profile.omitted.push_back(r.get<std::string>());
  return profile;
}

// RQ2-style error tallies over the 5xx (and transport) entries of a log:
// unique errors by full signature, unique failure points by first frame,
// library failure points by engine-component first frames.
struct ErrorMetrics {
  std::map<std::string, std::set<std::uint64_t>> unique_errors;         // category -> keys
  std::map<std::string, std::set<std::uint64_t>> unique_failure_points; // category -> keys
  std::set<std::uint64_t> library_failure_points;

  size_t unique_error_count() const {
    size_t n = 0;
    for (const auto& [cat, keys] : unique_errors) n += keys.size();
    return n;
  }
  size_t failure_point_count() const {
    size_t n = 0;
    for (const auto& [cat, keys] : unique_failure_points) n += keys.size();
    return n;
  }
  size_t count_in(const std::map<std::string, std::set<std::uint64_t>>& bucket,
                  const std::string& category) const {
    auto it = bucket.find(category);
    return it == bucket.end() ? 0 : it->second.size();
  }
};

inline ErrorMetrics error_metrics(const std::vector<CampaignLogEntry>& log,
                                  const NamespaceConfig& config = {}) {
  ErrorMetrics out;
  for (const auto& entry : log) {
    if (!entry.error || !entry.error->is_object() || !entry.error->contains("signature")) continue;
    ErrorSignature sig = error_signature_from_json((*entry.error)["signature"]);
    ErrorClassification cls = classify_error(sig, config);
    std::string category = error_category_name(cls.category);
    out.unique_errors[category].insert(cls.unique_error_key);
    out.unique_failure_points[category].insert(cls.failure_point_key);
    if (cls.is_library) out.library_failure_points.insert(cls.failure_point_key);
  }
  return out;
}

// Log file IO: newline-delimited JSON, one record per request.
inline std::string log_to_ndjson(const std::vector<CampaignLogEntry>& log) {
  std::string out;
  for (const auto& entry : log) {
    out += log_entry_to_json(entry).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<CampaignLogEntry> log_from_ndjson(const std::string& text) {
  std::vector<CampaignLogEntry> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json doc = nlohmann::json::parse(line);
    CampaignLogEntry entry;
    entry.index = doc.value("index", 0);
    entry.endpoint =
        doc.value("endpoint", "validate") == "aggregate" ? Endpoint::Aggregate : Endpoint::Validate;
    entry.status = doc.value("status", 0);
    if (doc.contains("targets-new"))
      for (const auto& t : doc["targets-new"]) entry.targets_new.push_back(t.get<std::string>());
    entry.outcomes = doc.contains("outcomes") ? doc["outcomes"] : nlohmann::json::array();
    if (doc.contains("error")) entry.error = doc["error"];
    out.push_back(std::move(entry));
  }
  return out;
}

// The per-run metric vector used by experiment reports. Counts are unique
// executed rules per result type (RQ3); frequencies are mean per-rule result
// fractions (RQ4); error counts follow RQ2.
struct RunMetrics {
  std::map<std::string, double> values;
};

inline RunMetrics compute_run_metrics(const std::vector<CampaignLogEntry>& log,
                                      const RuleSetVersion& version) {
  RunMetrics out;
  RuleResultCounts validation, aggregation;
  std::set<std::string> validation_ids, aggregation_ids;
  for (const auto& r : version.validation) validation_ids.insert(r.id);
  for (const auto& r : version.aggregation) aggregation_ids.insert(r.id);
  for (const auto& entry : log) {
    RuleResultCounts tmp;
    accumulate_log_entry(tmp, entry);
    for (const auto& [rule, c] : tmp.counts) {
      auto& dest = validation_ids.count(rule) ? validation : aggregation;
      auto& slot = dest.counts[rule];
      for (size_t i = 0; i < 4; ++i) slot[i] += c[i];
    }
  }
  auto store_counts = [&](const char* prefix, const RuleResultCounts& counts) {
    out.values[std::string(prefix) + ".rules-pass"] =
        static_cast<double>(counts.rules_with(RuleResult::Pass));
    out.values[std::string(prefix) + ".rules-fail"] =
        static_cast<double>(counts.rules_with(RuleResult::Fail));
    out.values[std::string(prefix) + ".rules-warning"] =
        static_cast<double>(counts.rules_with(RuleResult::Warning));
    out.values[std::string(prefix) + ".rules-notApplied"] =
        static_cast<double>(counts.rules_with(RuleResult::NotApplied));
  };
  store_counts("validation", validation);
  store_counts("aggregation", aggregation);

  auto store_frequencies = [&](const char* prefix, const RuleResultCounts& counts) {
    FrequencyProfile profile = frequency_profile(counts);
    std::array<double, 4> mean{};
    if (!profile.fractions.empty()) {
      for (const auto& [rule, f] : profile.fractions)
        for (size_t i = 0; i < 4; ++i) mean[i] += f[i];
      for (auto& m : mean) m /= static_cast<double>(profile.fractions.size());
    }
    out.values[std::string(prefix) + ".freq-pass"] = mean[0];
    out.values[std::string(prefix) + ".freq-fail"] = mean[1];
    out.values[std::string(prefix) + ".freq-warning"] = mean[2];
    out.values[std::string(prefix) + ".freq-notApplied"] = mean[3];
  };
  store_frequencies("validation", validation);
  store_frequencies("aggregation", aggregation);

  ErrorMetrics errors = error_metrics(log);
  out.values["errors.unique-all"] = static_cast<double>(errors.unique_error_count());
  out.values["errors.unique-remaining"] =
      static_cast<double>(errors.count_in(errors.unique_errors, "Remaining"));
  out.values["errors.failure-points-all"] = static_cast<double>(errors.failure_point_count());
  out.values["errors.failure-points-remaining"] =
      static_cast<double>(errors.count_in(errors.unique_failure_points, "Remaining"));
  out.values["errors.library-failure-points"] =
      static_cast<double>(errors.library_failure_points.size());
  return out;
}

inline nlohmann::json run_metrics_to_json(const RunMetrics& metrics) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, value] : metrics.values) out[key] = value;
  return out;
}

inline RunMetrics run_metrics_from_json(const nlohmann::json& doc) {
  RunMetrics out;
  for (const auto& [key, value] : doc.items()) out.values[key] = value.get<double>();
  return out;
}

}  // namespace regula
