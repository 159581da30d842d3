#include <doctest.h>

#include <algorithm>
#include <map>

#include "regula/mutation.hpp"

#include "mutation_oracle.hpp"
#include "test_support.hpp"

using namespace regula;

namespace {

// The motivating rule written as a check-only double implication, so both
// implications are mutation sites.
const char* kDoubleImplication =
    "rule T: check messageType = 'H' implies (surgery = 96 implies basis > 32) severity error";

// Differing-node count between two expressions; a swapped implication counts
// as one touched node.
int expr_diff(const ExprPtr& a, const ExprPtr& b);

int expr_diff_children(const Expr& ea, const Expr& eb) {
  return std::visit(
      [&](const auto& na) -> int {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(eb.node);
        if constexpr (std::is_same_v<T, Comparison>) {
          if (na.op != nb.op) return 1;
          return expr_diff(na.lhs, nb.lhs) + expr_diff(na.rhs, nb.rhs);
        } else if constexpr (std::is_same_v<T, Membership>) {
          if (na.op != nb.op || !(na.values == nb.values)) return 1;
          return expr_diff(na.subject, nb.subject);
        } else if constexpr (std::is_same_v<T, Connective>) {
          if (na.op != nb.op) return 1;
          return expr_diff(na.lhs, nb.lhs) + expr_diff(na.rhs, nb.rhs);
        } else if constexpr (std::is_same_v<T, Implication>) {
          if (expr_equal(na.antecedent, nb.consequent) && expr_equal(na.consequent, nb.antecedent))
            return 1;  // subtree swap
          return expr_diff(na.antecedent, nb.antecedent) +
                 expr_diff(na.consequent, nb.consequent);
        } else {
          return 1;  // leaves differing in own fields
        }
      },
      ea.node);
}

int expr_diff(const ExprPtr& a, const ExprPtr& b) {
  if (expr_equal(a, b)) return 0;
  if (a->node.index() != b->node.index()) return 1;
  return expr_diff_children(*a, *b);
}

int rule_diff(const Rule& a, const Rule& b) {
  auto ea = rule_expressions(a);
  auto eb = rule_expressions(b);
  if (ea.size() != eb.size()) return 1000;
  int total = 0;
  for (size_t i = 0; i < ea.size(); ++i) total += expr_diff(ea[i], eb[i]);
  return total;
}

std::vector<MutOp> involutive_ops() {
  return {MutOp::NI, MutOp::RI, MutOp::SComp, MutOp::SConn, MutOp::SSE, MutOp::SSR, MutOp::SSI};
}

}  // namespace

TEST_CASE("NI sites: the double-implication rule has two equality comparisons") {
  Rule rule = parse_rule(kDoubleImplication);
  CHECK(enumerate_sites(rule, MutOp::NI).size() == 2);
}

TEST_CASE("SSR sites: the double-implication rule has two implication nodes") {
  Rule rule = parse_rule(kDoubleImplication);
  CHECK(enumerate_sites(rule, MutOp::SSR).size() == 2);
}

TEST_CASE("a rule without connectives has no SConn sites") {
  Rule rule = parse_rule("rule T: check surgery = 96 severity error");
  CHECK(enumerate_sites(rule, MutOp::SConn).empty());
}

TEST_CASE("NI at site 1 flips the surgery comparison") {
  Rule rule = parse_rule(kDoubleImplication);
  Rule mutant = apply_operator(rule, MutOp::NI, 1);
  std::string source = format_rule(mutant);
  CHECK(source.find("surgery != 96") != std::string::npos);
  CHECK(source.find("messageType = 'H'") != std::string::npos);
}

TEST_CASE("SSR at the inner implication swaps antecedent and consequent") {
  Rule rule = parse_rule(kDoubleImplication);
  Rule mutant = apply_operator(rule, MutOp::SSR, 1);
  std::string source = format_rule(mutant);
  CHECK(source.find("(basis > 32) implies (surgery = 96)") != std::string::npos);
}

TEST_CASE("AD variants follow the documented order with calendar clamping") {
  Rule rule = parse_rule("rule D: check diagnosisDate = @2020-01-31 severity error");
  CHECK(enumerate_sites(rule, MutOp::AD).size() == 6);
  // variants: +1y, -1y, +1m, -1m, +1d, -1d
  CHECK(format_rule(apply_operator(rule, MutOp::AD, 0)).find("@2021-01-31") != std::string::npos);
  CHECK(format_rule(apply_operator(rule, MutOp::AD, 1)).find("@2019-01-31") != std::string::npos);
  CHECK(format_rule(apply_operator(rule, MutOp::AD, 2)).find("@2020-02-29") != std::string::npos);
  CHECK(format_rule(apply_operator(rule, MutOp::AD, 3)).find("@2019-12-31") != std::string::npos);
  CHECK(format_rule(apply_operator(rule, MutOp::AD, 4)).find("@2020-02-01") != std::string::npos);
  CHECK(format_rule(apply_operator(rule, MutOp::AD, 5)).find("@2020-01-30") != std::string::npos);
}

TEST_CASE("SComp swaps follow the operator table") {
  Rule rule = parse_rule("rule C: check age > 1 and age < 2 and age >= 3 and age <= 4 severity error");
  auto sites = enumerate_sites(rule, MutOp::SComp);
  REQUIRE(sites.size() == 4);
  CHECK(format_rule(apply_operator(rule, MutOp::SComp, 0)).find("age <= 1") != std::string::npos);
  CHECK(format_rule(apply_operator(rule, MutOp::SComp, 1)).find("age >= 2") != std::string::npos);
  CHECK(format_rule(apply_operator(rule, MutOp::SComp, 2)).find("age < 3") != std::string::npos);
  CHECK(format_rule(apply_operator(rule, MutOp::SComp, 3)).find("age > 4") != std::string::npos);
}

TEST_CASE("RI, SSE, and SSI rewrite their single sites") {
  Rule ri = parse_rule("rule R: check basis in ['22'] severity error");
  CHECK(format_rule(apply_operator(ri, MutOp::RI, 0)).find("notIn") != std::string::npos);

  Rule sse = parse_rule("rule E: check startswith(topography, 'C5') severity error");
  CHECK(format_rule(apply_operator(sse, MutOp::SSE, 0)).find("endswith") != std::string::npos);

  Rule ssi = parse_rule("rule S: check substring(topography, 0, 2) = 'C5' severity error");
  CHECK(format_rule(apply_operator(ssi, MutOp::SSI, 0)).find("substring(topography, 2, 0)") !=
        std::string::npos);
}

TEST_CASE("invalid sites are rejected") {
  Rule rule = parse_rule("rule T: check surgery = 96 severity error");
  CHECK_THROWS_AS(apply_operator(rule, MutOp::NI, 1), ConfigError);
  CHECK_THROWS_AS(apply_operator(rule, MutOp::SSR, 0), ConfigError);
}

TEST_CASE("involution: double application restores structural equality on the corpus") {
  for (const Rule& rule : test::all_corpus_rules()) {
    for (MutOp op : involutive_ops()) {
      for (int site : enumerate_sites(rule, op)) {
        Rule once = apply_operator(rule, op, site);
        Rule twice = apply_operator(once, op, site);
        CHECK_MESSAGE(rule_equal(rule, twice),
                      "involution failed: ", rule_id(rule), " ", mut_op_name(op), " site ", site);
      }
    }
  }
}

TEST_CASE("every mutant differs from its original at exactly one node") {
  for (const char* version : {"s1", "s3"}) {
    const RuleSetVersion& v = test::corpus_version(version);
    std::map<std::string, Rule> originals;
    for (const auto& r : v.validation) originals.emplace(r.id, Rule{r});
    for (const auto& r : v.aggregation) originals.emplace(r.id, Rule{r});
    for (const Mutant& m : generate_mutants(v)) {
      CHECK_MESSAGE(rule_diff(originals.at(m.rule_id), m.mutated) == 1,
                    m.rule_id, " ", mut_op_name(m.op), " site ", m.site);
    }
  }
}

TEST_CASE("generate_mutants matches the independent enumerator per rule and operator") {
  const RuleSetVersion& v = test::corpus_version("s2");
  std::vector<Mutant> production = generate_mutants(v);

  std::map<std::pair<std::string, MutOp>, std::vector<std::string>> got;
  for (const auto& m : production) got[{m.rule_id, m.op}].push_back(m.mutated_source);

  std::map<std::pair<std::string, MutOp>, std::vector<std::string>> expected;
  size_t oracle_total = 0;
  for (const auto& rule : v.validation) {
    for (auto& om : test::oracle_enumerate(Rule{rule})) {
      expected[{om.rule_id, om.op}].push_back(om.source);
      ++oracle_total;
    }
  }
  for (const auto& rule : v.aggregation) {
    for (auto& om : test::oracle_enumerate(Rule{rule})) {
      expected[{om.rule_id, om.op}].push_back(om.source);
      ++oracle_total;
    }
  }

  CHECK(production.size() == oracle_total);
  REQUIRE(got.size() == expected.size());
  for (auto& [key, sources] : expected) {
    auto it = got.find(key);
    REQUIRE_MESSAGE(it != got.end(), key.first, "/", mut_op_name(key.second));
    auto mine = it->second;
    std::sort(mine.begin(), mine.end());
    std::sort(sources.begin(), sources.end());
    CHECK_MESSAGE(mine == sources, key.first, "/", mut_op_name(key.second));
  }
}

TEST_CASE("an empty rule set yields no mutants") {
  RuleSetVersion empty;
  empty.id = "none";
  CHECK(generate_mutants(empty).empty());
}

TEST_CASE("duplicating a rule doubles its mutant contribution") {
  RuleSetVersion v;
  v.id = "dup";
  auto rule = std::get<ValidationRule>(
      parse_rule("rule D1: when age >= 0 check age <= 120 severity error"));
  v.validation.push_back(rule);
  size_t single = generate_mutants(v).size();
  auto copy = rule;
  copy.id = "D2";
  v.validation.push_back(copy);
  CHECK(generate_mutants(v).size() == 2 * single);
}

TEST_CASE("mutant enumeration is order-stable across calls") {
  const RuleSetVersion& v = test::corpus_version("s1");
  std::vector<Mutant> a = generate_mutants(v);
  std::vector<Mutant> b = generate_mutants(v);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rule_id == b[i].rule_id);
    CHECK(a[i].op == b[i].op);
    CHECK(a[i].site == b[i].site);
    CHECK(a[i].mutated_source == b[i].mutated_source);
  }
}

TEST_CASE("mutant corpus file round-trips") {
  test::TempDir dir("mutants");
  const RuleSetVersion& v = test::corpus_version("s1");
  std::vector<Mutant> mutants = generate_mutants(v);
  write_text_file(dir.file("mutants.json"), mutants_to_json(mutants).dump());
  std::vector<Mutant> reloaded =
      mutants_from_json(nlohmann::json::parse(read_text_file(dir.file("mutants.json"))));
  REQUIRE(reloaded.size() == mutants.size());
  for (size_t i = 0; i < mutants.size(); ++i) {
    CHECK(reloaded[i].mutated_source == mutants[i].mutated_source);
    CHECK(rule_equal(reloaded[i].mutated, mutants[i].mutated));
  }
}

namespace {

// A tiny fixture where every mutant flips at least one covered outcome.
struct MutationFixture {
  VariableRegistry registry;
  RuleSetVersion version;
  TestSuite suite;

  MutationFixture() {
    registry = registry_from_json(nlohmann::json::parse(R"({"variables": [
      {"name": "age", "kind": "integer", "constraint": {"type": "range", "min": 0, "max": 130}},
      {"name": "stageGroup", "kind": "code"}
    ]})"));
    version.id = "fix";
    version.validation.push_back(std::get<ValidationRule>(
        parse_rule("rule F1: check age >= 10 severity error")));
    version.validation.push_back(std::get<ValidationRule>(
        parse_rule("rule F2: check age <= 100 severity warning")));
    version.aggregation.push_back(std::get<AggregationRule>(
        parse_rule("agg F3 -> stageGroup: age >= 50 => 'Late' ; else => 'Early'")));

    suite.meta = {"HAND", 0, 0, "fix", "strict"};
    VersionRegistry versions;
    versions.put(version);
    ApiCore core(std::move(versions), registry);
    InProcessClient client(core);
    // boundary records so every comparison swap flips something
    for (int age : {10, 9, 100, 101, 50, 49}) {
      nlohmann::json body{{"age", age}};
      for (Endpoint endpoint : {Endpoint::Validate, Endpoint::Aggregate}) {
        ClientResponse r = client.post_record(endpoint, "fix", SchemaMode::Strict, body);
        TestCase t;
        t.endpoint = endpoint;
        t.version = "fix";
        t.body = body;
        t.oracle_status = r.status;
        t.oracle_outcomes = r.status == 200 ? r.body["outcomes"] : nlohmann::json::array();
        suite.tests.push_back(std::move(t));
      }
    }
  }
};

}  // namespace

TEST_CASE("a boundary-covering suite kills every mutant of the fixture") {
  MutationFixture fix;
  std::vector<Mutant> mutants = generate_mutants(fix.version);
  REQUIRE(mutants.size() == 3);  // one SComp site per rule
  MutationReport report = run_mutation_testing(fix.suite, fix.version, mutants, fix.registry);
  CHECK(report.total == 3);
  CHECK(report.killed == 3);
  CHECK(report.ms == doctest::Approx(1.0));
  CHECK(report.ms_validation == doctest::Approx(1.0));
  CHECK(report.ms_aggregation == doctest::Approx(1.0));
  CHECK(report.killed_by_construction == 0);
  CHECK(report.kill_matrix.size() == 3);
  // per-operator breakdown mirrors the operator ids
  REQUIRE(report.per_operator.count("SComp"));
  CHECK(report.per_operator.at("SComp").total == 3);
}

TEST_CASE("an empty suite kills nothing") {
  MutationFixture fix;
  TestSuite empty;
  empty.meta = fix.suite.meta;
  std::vector<Mutant> mutants = generate_mutants(fix.version);
  MutationReport report = run_mutation_testing(empty, fix.version, mutants, fix.registry);
  CHECK(report.killed == 0);
  CHECK(report.ms == doctest::Approx(0.0));
}

TEST_CASE("zero mutants are rejected as a precondition error") {
  MutationFixture fix;
  CHECK_THROWS_AS(run_mutation_testing(fix.suite, fix.version, {}, fix.registry), ConfigError);
}

TEST_CASE("mutants that no longer load are killed by construction and flagged") {
  MutationFixture fix;
  std::vector<Mutant> mutants = generate_mutants(fix.version);
  Mutant broken;
  broken.rule_id = "F1";
  broken.op = MutOp::NI;
  broken.site = 0;
  broken.mutated = mutants[0].mutated;
  broken.mutated_source = "rule F1: check ghost = 1 severity error";  // unknown variable
  broken.from_validation_rule = true;
  mutants.push_back(broken);
  MutationReport report = run_mutation_testing(fix.suite, fix.version, mutants, fix.registry);
  CHECK(report.killed_by_construction == 1);
  REQUIRE(report.construction_flagged.size() == 1);
  CHECK(report.construction_flagged[0].find("F1/NI") != std::string::npos);
  CHECK(report.killed == report.total);
}

TEST_CASE("parallel mutation runs reduce to the same report as sequential ones") {
  const RuleSetVersion& v = test::corpus_version("s1");
  // small deterministic suite via direct requests
  VersionRegistry versions;
  versions.put(v);
  ApiCore core(std::move(versions), test::corpus_registry());
  InProcessClient client(core);
  TestSuite suite;
  suite.meta = {"HAND", 0, 0, "s1", "strict"};
  Rng rng(1717);
  SamplerConfig config;
  Sampler sampler(test::corpus_registry(), config, rng);
  for (int i = 0; i < 12; ++i) {
    nlohmann::json body = record_to_json(sampler.sample_record());
    Endpoint endpoint = i % 2 ? Endpoint::Validate : Endpoint::Aggregate;
    ClientResponse r = client.post_record(endpoint, "s1", SchemaMode::Strict, body);
    TestCase t;
    t.endpoint = endpoint;
    t.version = "s1";
    t.body = body;
    t.oracle_status = r.status;
    t.oracle_outcomes = r.status == 200 ? r.body["outcomes"] : nlohmann::json::array();
    suite.tests.push_back(std::move(t));
  }
  std::vector<Mutant> mutants = generate_mutants(v);
  MutationReport sequential =
      run_mutation_testing(suite, v, mutants, test::corpus_registry(), {1});
  MutationReport parallel = run_mutation_testing(suite, v, mutants, test::corpus_registry(), {4});
  CHECK(sequential.killed == parallel.killed);
  CHECK(sequential.kill_matrix == parallel.kill_matrix);
  CHECK(mutation_report_to_json(sequential) == mutation_report_to_json(parallel));
  CHECK(mutation_report_to_csv(sequential) == mutation_report_to_csv(parallel));
  // score bounds and partition additivity
  CHECK(sequential.killed == sequential.killed_validation + sequential.killed_aggregation);
  CHECK(sequential.total == sequential.total_validation + sequential.total_aggregation);
  CHECK(sequential.ms >= 0.0);
  CHECK(sequential.ms <= 1.0);
}
