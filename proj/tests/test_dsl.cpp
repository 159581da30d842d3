#include <doctest.h>

#include "regula/parser.hpp"
#include "regula/printer.hpp"
#include "regula/references.hpp"
#include "regula/registry.hpp"

#include "test_support.hpp"

using namespace regula;

namespace {

const char* kGoldenValidation =
    "rule V-EX: when messageType = 'H' check surgery = 96 implies basis > 32 severity error";

ValidationRule parse_validation(const std::string& text) {
  return std::get<ValidationRule>(parse_rule(text));
}

}  // namespace

TEST_CASE("parses the motivating validation rule into applicability and check") {
  ValidationRule rule = parse_validation(kGoldenValidation);
  CHECK(rule.id == "V-EX");
  CHECK(rule.severity == Severity::Error);

  REQUIRE(rule.applicability);
  const auto& when = std::get<Comparison>(rule.applicability->node);
  CHECK(when.op == CompareOp::Eq);
  CHECK(std::get<VarRef>(when.lhs->node).name == "messageType");
  CHECK(std::get<LiteralExpr>(when.rhs->node).value.code == "H");

  const auto& check = std::get<Implication>(rule.check->node);
  const auto& ante = std::get<Comparison>(check.antecedent->node);
  CHECK(ante.op == CompareOp::Eq);
  CHECK(std::get<VarRef>(ante.lhs->node).name == "surgery");
  CHECK(std::get<LiteralExpr>(ante.rhs->node).value.number == 96);
  const auto& cons = std::get<Comparison>(check.consequent->node);
  CHECK(cons.op == CompareOp::Gt);
  CHECK(std::get<LiteralExpr>(cons.rhs->node).value.number == 32);
}

TEST_CASE("parses an aggregation rule whose first branch is a membership guard") {
  Rule rule = parse_rule(
      "agg A-MV -> morphologicallyVerified:"
      " basis in ['22', '32'] => 'Yes' ;"
      " basis in ['00', '10'] => 'No' ;"
      " else => null");
  const auto& agg = std::get<AggregationRule>(rule);
  CHECK(agg.id == "A-MV");
  CHECK(agg.output_variable == "morphologicallyVerified");
  REQUIRE(agg.branches.size() == 2);
  const auto& first = std::get<Membership>(agg.branches[0].guard->node);
  CHECK(first.op == MemberOp::In);
  CHECK(first.values.size() == 2);
  CHECK(agg.branches[0].output->code == "Yes");
  REQUIRE(agg.fallback);
  CHECK_FALSE(agg.fallback->output.has_value());
}

TEST_CASE("incomplete expression is a syntax error at end of input") {
  try {
    parse_rule("rule X: check surgery =");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() > 20);
    CHECK_FALSE(e.expected().empty());
  }
}

TEST_CASE("syntax errors name the expected tokens") {
  try {
    parse_rule("rule X: check surgery ? 1 severity error");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("expected") != std::string::npos);
  }
}

TEST_CASE("every Table-style construct is representable and parseable") {
  const char* source =
      "rule ALL: when d1 >= @2020-02-29 and (x = 1 or y != 'A')"
      " check topo in ['C1', 'C2'] and topo notIn ['C3']"
      " and (startswith(topo, 'C') or endswith(topo, '9'))"
      " and substring(topo, 0, 2) = 'C5'"
      " and (a < 1 implies b <= 2)"
      " and (c > 3 implies e >= 4)"
      " severity warning";
  Rule rule = parse_rule(source);
  std::string printed = format_rule(rule);
  Rule reparsed = parse_rule(printed);
  CHECK(rule_equal(rule, reparsed));
}

TEST_CASE("date literals must be calendar-valid") {
  CHECK_THROWS_AS(parse_rule("rule D: check d = @2021-02-29 severity error"), ParseError);
  CHECK_THROWS_AS(parse_rule("rule D: check d = @2020-13-01 severity error"), ParseError);
  CHECK_NOTHROW(parse_rule("rule D: check d = @2020-02-29 severity error"));
}

TEST_CASE("substring indices must be non-negative") {
  CHECK_THROWS_AS(parse_rule("rule S: check substring(t, -1, 2) = 'C' severity error"),
                  ParseError);
}

TEST_CASE("round-trip: parse(format(parse(t))) is structurally identical for the corpus") {
  for (const Rule& rule : test::all_corpus_rules()) {
    std::string printed = format_rule(rule);
    Rule once = parse_rule(printed);
    CHECK_MESSAGE(rule_equal(rule, once), "round-trip failed for ", rule_id(rule));
    CHECK(format_rule(once) == printed);
  }
}

TEST_CASE("parsing is deterministic") {
  for (int i = 0; i < 3; ++i) {
    Rule a = parse_rule(kGoldenValidation);
    Rule b = parse_rule(kGoldenValidation);
    CHECK(rule_equal(a, b));
  }
}

TEST_CASE("implication prints with explicit parentheses (frozen golden)") {
  std::string golden = read_text_file(
      (std::filesystem::path(REGULA_GOLDEN_DIR) / "v_ex_formatted.txt").string());
  while (!golden.empty() && (golden.back() == '\n' || golden.back() == '\r')) golden.pop_back();
  CHECK(format_rule(parse_rule(kGoldenValidation)) == golden);
}

TEST_CASE("membership value lists print in parsed order") {
  Rule rule = parse_rule("rule M: check basis in ['90', '10', '50'] severity error");
  std::string printed = format_rule(rule);
  CHECK(printed.find("['90', '10', '50']") != std::string::npos);
}

TEST_CASE("two declarations are rejected by parse_rule but accepted by parse_rules") {
  std::string two =
      "rule A: check x = 1 severity error\nrule B: check x = 2 severity warning";
  CHECK_THROWS_AS(parse_rule(two), ParseError);
  CHECK(parse_rules(two).size() == 2);
}

TEST_CASE("comments and blank lines are ignored") {
  auto rules = parse_rules("# header\n\nrule A: check x = 1 severity error # not a comment?\n");
  // '#' starts a line comment anywhere outside a literal
  CHECK(rules.size() == 1);
}

TEST_CASE("validate_references finds nothing for registered variables") {
  Rule rule = parse_rule("rule R: when surgery >= 0 check basis in ['22'] severity error");
  CHECK(validate_references(rule, test::corpus_registry()).empty());
}

TEST_CASE("validate_references reports a typo once, in first-mention order") {
  Rule rule = parse_rule(
      "rule R: when surgerg >= 0 check surgerg = 1 and basix in ['22'] severity error");
  auto unknown = validate_references(rule, test::corpus_registry());
  REQUIRE(unknown.size() == 2);
  CHECK(unknown[0] == "surgerg");
  CHECK(unknown[1] == "basix");
}

TEST_CASE("validate_references covers the aggregation output variable") {
  Rule rule = parse_rule("agg A -> unregisteredOutput: basis in ['22'] => 'Yes' ; else => null");
  auto unknown = validate_references(rule, test::corpus_registry());
  REQUIRE(unknown.size() == 1);
  CHECK(unknown[0] == "unregisteredOutput");
}

TEST_CASE("string function and substring subjects count as references") {
  Rule rule = parse_rule("rule R: check startswith(ghost, 'C') severity error");
  CHECK(validate_references(rule, test::corpus_registry()) ==
        std::vector<std::string>{"ghost"});
  Rule sub = parse_rule("rule R: check substring(phantom, 0, 2) = 'C5' severity error");
  CHECK(validate_references(sub, test::corpus_registry()) ==
        std::vector<std::string>{"phantom"});
}
