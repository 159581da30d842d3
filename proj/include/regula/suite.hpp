#pragma once

#include <string>
#include <vector>

#include "regula/campaign.hpp"

namespace regula {

struct SuiteMeta {
  std::string strategy;
  std::uint64_t seed = 0;
  int budget = 0;
  std::string version;
  std::string schema_mode;
};

struct TestSuite {
  SuiteMeta meta;
  std::vector<TestCase> tests;
};

inline TestSuite make_suite(const CampaignConfig& config, const Archive& archive) {
  TestSuite suite;
  suite.meta = {strategy_name(config.strategy), config.seed, config.budget, config.version,
                schema_mode_name(config.mode)};
  suite.tests = archive.retained;
  return suite;
}

inline nlohmann::json suite_to_json(const TestSuite& suite) {
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : suite.tests) {
    tests.push_back(nlohmann::json{{"endpoint", endpoint_name(t.endpoint)},
                                   {"body", t.body},
                                   {"oracle", nlohmann::json{{"status", t.oracle_status},
                                                             {"outcomes", t.oracle_outcomes}}}});
  }
  return nlohmann::json{
      {"meta", nlohmann::json{{"strategy", suite.meta.strategy},
                              {"seed", suite.meta.seed},
                              {"budget", suite.meta.budget},
                              {"version", suite.meta.version},
                              {"schema-mode", suite.meta.schema_mode}}},
      {"tests", std::move(tests)}};
}

inline TestSuite suite_from_json(const nlohmann::json& doc) {
  TestSuite suite;
  const auto& meta = doc.at("meta");
  suite.meta.strategy = meta.at("strategy").get<std::string>();
  suite.meta.seed = meta.at("seed").get<std::uint64_t>();
  suite.meta.budget = meta.at("budget").get<int>();
  suite.meta.version = meta.at("version").get<std::string>();
  suite.meta.schema_mode = meta.at("schema-mode").get<std::string>();
  for (const auto& t : doc.at("tests")) {
    TestCase test;
    std::string ep = t.at("endpoint").get<std::string>();
    test.endpoint = ep == "aggregate" ? Endpoint::Aggregate : Endpoint::Validate;
    test.version = suite.meta.version;
    test.body = t.at("body");
    test.oracle_status = t.at("oracle").at("status").get<int>();
    test.oracle_outcomes = t.at("oracle").at("outcomes");
    suite.tests.push_back(std::move(test));
  }
  return suite;
}

inline void save_suite(const TestSuite& suite, const std::string& path) {
  write_text_file(path, suite_to_json(suite).dump(2) + "\n");
}

inline TestSuite load_suite(const std::string& path) {
  return suite_from_json(nlohmann::json::parse(read_text_file(path)));
}

enum class VerdictKind { Pass, Fail, Error };

struct Verdict {
  VerdictKind kind = VerdictKind::Pass;
  std::string detail;
};

// A replayed test passes iff the response status equals the oracle status
// and, for 200 oracles, the outcome vector (results and aggregation outputs)
// equals the oracle snapshot. Transport failures are errors, not failures.
inline std::vector<Verdict> replay_suite(const TestSuite& suite, ServiceClient& client) {
  auto mode = schema_mode_from(suite.meta.schema_mode);
  std::vector<Verdict> verdicts;
  verdicts.reserve(suite.tests.size());
  for (const auto& test : suite.tests) {
    ClientResponse response = client.post_record(test.endpoint, test.version,
                                                 mode.value_or(SchemaMode::Default), test.body);
    if (response.transport_failed()) {
      verdicts.push_back({VerdictKind::Error, response.transport_error});
      continue;
    }
    if (response.status != test.oracle_status) {
      verdicts.push_back({VerdictKind::Fail, "status " + std::to_string(response.status) +
                                                 " != oracle " +
                                                 std::to_string(test.oracle_status)});
      continue;
    }
    if (test.oracle_status == 200) {
      nlohmann::json outcomes = response.body.is_object() && response.body.contains("outcomes")
                                    ? response.body["outcomes"]
                                    : nlohmann::json::array();
      if (outcomes != test.oracle_outcomes) {
        verdicts.push_back({VerdictKind::Fail, "outcome vector deviates from oracle"});
        continue;
      }
    }
    verdicts.push_back({VerdictKind::Pass, ""});
  }
  return verdicts;
}

inline size_t count_verdicts(const std::vector<Verdict>& verdicts, VerdictKind kind) {
  size_t n = 0;
  for (const auto& v : verdicts)
    if (v.kind == kind) ++n;
  return n;
}

}  // namespace regula
