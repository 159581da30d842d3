#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "regula/sampler.hpp"
#include "regula/targets.hpp"

namespace regula {

enum class Strategy { RandomBB, EvoGuri, MioLite };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::RandomBB: return "RANDOM_BB";
    case Strategy::EvoGuri: return "EVOGURI";
    case Strategy::MioLite: return "MIO_LITE";
  }
  return "?";
}

inline std::optional<Strategy> strategy_from(const std::string& s) {
  if (s == "RANDOM_BB") return Strategy::RandomBB;
  if (s == "EVOGURI") return Strategy::EvoGuri;
  if (s == "MIO_LITE") return Strategy::MioLite;
  return std::nullopt;
}

struct CampaignConfig {
  Strategy strategy = Strategy::RandomBB;
  std::string version;
  SchemaMode mode = SchemaMode::Strict;
  int budget = 0;  // request count; must be >= 1
  std::uint64_t seed = 0;
  std::vector<Endpoint> endpoints = {Endpoint::Validate, Endpoint::Aggregate};
  double absent_probability = 0.2;
  double invalid_probability = 0.2;
  // MIO_LITE parameters
  double p_fresh = 0.5;
  int population_cap = 10;
  // keep request bodies in memory (tests only; not serialized)
  bool record_requests = false;
};

struct CampaignResult {
  Archive archive;
  std::vector<CampaignLogEntry> log;
  bool aborted = false;
  size_t max_population_size = 0;                 // MIO_LITE bound observation
  std::vector<nlohmann::json> request_bodies;     // only when record_requests
};

namespace detail {

struct PopulationMember {
  Endpoint endpoint;
  Record record;
};

inline bool strategy_tracks_pairs(Strategy s) { return s != Strategy::RandomBB; }

}  // namespace detail

// Sequential by contract: archive semantics depend on request order. The
// whole campaign is a pure function of (config, rule corpus).
inline CampaignResult run_campaign(const CampaignConfig& config, ServiceClient& client,
                                   const VariableRegistry& registry) {
  if (config.budget < 1) throw ConfigError("campaign budget must be >= 1");
  if (config.endpoints.empty()) throw ConfigError("campaign needs at least one endpoint");

  Rng rng(config.seed);
  SamplerConfig sampler_config;
  sampler_config.mode = config.mode;
  sampler_config.absent_probability = config.absent_probability;
  sampler_config.invalid_probability = config.invalid_probability;
  Sampler sampler(registry, sampler_config, rng);

  CampaignResult out;
  std::map<std::string, std::deque<detail::PopulationMember>> populations;
  int consecutive_transport_failures = 0;

  for (int i = 0; i < config.budget; ++i) {
    Endpoint endpoint;
    Record record;
    bool mutated = false;
    if (config.strategy == Strategy::MioLite && !rng.chance(config.p_fresh)) {
      // Mutate a member of a uniformly chosen target population.
      std::vector<const std::string*> candidates;
      for (const auto& [key, pop] : populations)
        if (!pop.empty()) candidates.push_back(&key);
      if (!candidates.empty()) {
        const auto& pop =
            populations[*candidates[rng.bounded(static_cast<std::uint32_t>(candidates.size()))]];
        const auto& member = pop[rng.bounded(static_cast<std::uint32_t>(pop.size()))];
        endpoint = member.endpoint;
        record = sampler.mutate_record(member.record);
        mutated = true;
      }
    }
    if (!mutated) {
      endpoint = config.endpoints[rng.bounded(static_cast<std::uint32_t>(config.endpoints.size()))];
      record = sampler.sample_record();
    }

    nlohmann::json body = record_to_json(record);
    if (config.record_requests) out.request_bodies.push_back(body);
    ClientResponse response = client.post_record(endpoint, config.version, config.mode, body);

    CampaignLogEntry entry;
    entry.index = i;
    entry.endpoint = endpoint;
    entry.status = response.status;
    entry.outcomes = nlohmann::json::array();

    if (response.transport_failed()) {
      ErrorSignature sig{{{"http-client", "request", response.transport_error}}};
      entry.error = nlohmann::json{{"signature", error_signature_to_json(sig)},
                                   {"category", error_category_name(ErrorCategory::IO)}};
      out.log.push_back(std::move(entry));
      if (++consecutive_transport_failures >= 5) {
        out.aborted = true;
        break;
      }
      continue;
    }
    consecutive_transport_failures = 0;

    std::vector<Target> targets;
    try {
      targets = extract_targets(response, endpoint);
    } catch (const ExtractionError& e) {
      ErrorSignature sig{{{"campaign-harness", "extract-targets", e.what()}}};
      entry.error = nlohmann::json{{"signature", error_signature_to_json(sig)},
                                   {"category", error_category_name(ErrorCategory::Harness)}};
      out.log.push_back(std::move(entry));
      continue;
    }

    if (response.status == 200) entry.outcomes = response.body["outcomes"];
    if (response.status == 500 && response.body.is_object()) entry.error = response.body;

    std::vector<std::string> covers;
    std::vector<std::string> new_covers;
    for (const auto& t : targets) {
      if (t.kind == Target::Kind::RuleResultPair &&
          !detail::strategy_tracks_pairs(config.strategy))
        continue;
      std::string key = t.key();
      if (!out.archive.covered.count(key)) new_covers.push_back(key);
      covers.push_back(std::move(key));
    }

    // Retain the first coverer of each new target. The strategies differ in
    // the target universe: RANDOM_BB only sees endpoint-status targets
    // (filtered above), EVOGURI and MIO_LITE also see rule-result pairs.
    bool retain = !new_covers.empty();

    if (retain) {
      TestCase test;
      test.endpoint = endpoint;
      test.version = config.version;
      test.body = body;
      test.oracle_status = response.status;
      test.oracle_outcomes =
          response.status == 200 ? response.body["outcomes"] : nlohmann::json::array();
      test.covers = covers;
      test.new_covers = new_covers;
      size_t index = out.archive.retained.size();
      for (const auto& key : new_covers) out.archive.first_coverer[key] = index;
      out.archive.retained.push_back(std::move(test));
    }
    for (const auto& key : new_covers) out.archive.covered.insert(key);
    entry.targets_new = std::move(new_covers);

    if (config.strategy == Strategy::MioLite) {
      for (const auto& key : covers) {
        auto& pop = populations[key];
        pop.push_back({endpoint, record});
        if (pop.size() > static_cast<size_t>(config.population_cap)) pop.pop_front();
        out.max_population_size = std::max(out.max_population_size, pop.size());
      }
    }

    out.log.push_back(std::move(entry));
  }
  return out;
}

}  // namespace regula
