#pragma once

#include <algorithm>
#include <future>
#include <map>
#include <string>
#include <vector>

#include "regula/api.hpp"
#include "regula/client.hpp"
#include "regula/parser.hpp"
#include "regula/printer.hpp"
#include "regula/suite.hpp"

namespace regula {

// One single-site syntactic change per mutant. All operators except AD are
// involutive swaps; AD expands into six variants per date literal
// (+1y, -1y, +1m, -1m, +1d, -1d) with calendar clamping.
enum class MutOp { AD, NI, RI, SComp, SConn, SSE, SSR, SSI };

inline const char* mut_op_name(MutOp op) {
  switch (op) {
    case MutOp::AD: return "AD";
    case MutOp::NI: return "NI";
    case MutOp::RI: return "RI";
    case MutOp::SComp: return "SComp";
    case MutOp::SConn: return "SConn";
    case MutOp::SSE: return "SSE";
    case MutOp::SSR: return "SSR";
    case MutOp::SSI: return "SSI";
  }
  return "?";
}

inline std::optional<MutOp> mut_op_from(const std::string& s) {
  static const std::pair<const char*, MutOp> table[] = {
      {"AD", MutOp::AD},       {"NI", MutOp::NI},   {"RI", MutOp::RI},
      {"SComp", MutOp::SComp}, {"SConn", MutOp::SConn}, {"SSE", MutOp::SSE},
      {"SSR", MutOp::SSR},     {"SSI", MutOp::SSI}};
  for (const auto& [name, op] : table)
    if (s == name) return op;
  return std::nullopt;
}

inline const std::vector<MutOp>& all_mut_ops() {
  static const std::vector<MutOp> ops = {MutOp::AD,    MutOp::NI,  MutOp::RI,  MutOp::SComp,
                                         MutOp::SConn, MutOp::SSE, MutOp::SSR, MutOp::SSI};
  return ops;
}

constexpr int kDateVariantsPerLiteral = 6;

inline Date alter_date(const Date& d, int variant) {
  switch (variant) {
    case 0: return add_years_clamped(d, 1);
    case 1: return add_years_clamped(d, -1);
    case 2: return add_months_clamped(d, 1);
    case 3: return add_months_clamped(d, -1);
    case 4: return add_days(d, 1);
    default: return add_days(d, -1);
  }
}

namespace detail {

inline bool comparison_matches(const Comparison& c, MutOp op) {
  if (op == MutOp::NI) return c.op == CompareOp::Eq || c.op == CompareOp::Ne;
  if (op == MutOp::SComp)
    return c.op == CompareOp::Lt || c.op == CompareOp::Le || c.op == CompareOp::Gt ||
           c.op == CompareOp::Ge;
  return false;
}

inline CompareOp swap_comparison(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return CompareOp::Ne;
    case CompareOp::Ne: return CompareOp::Eq;
    case CompareOp::Gt: return CompareOp::Le;
    case CompareOp::Le: return CompareOp::Gt;
    case CompareOp::Lt: return CompareOp::Ge;
    case CompareOp::Ge: return CompareOp::Lt;
  }
  return op;
}

// Pre-order site count within one expression. Children are visited in field
// order; membership value lists are visited after the subject operand.
inline int count_sites(const Expr& e, MutOp op) {
  return std::visit(
      [&](const auto& node) -> int {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          int own = comparison_matches(node, op) ? 1 : 0;
          return own + count_sites(*node.lhs, op) + count_sites(*node.rhs, op);
        } else if constexpr (std::is_same_v<T, Membership>) {
          int own = op == MutOp::RI ? 1 : 0;
          int inner = count_sites(*node.subject, op);
          if (op == MutOp::AD)
            for (const auto& v : node.values)
              if (v.kind == Literal::Kind::Date) ++inner;
          return own + inner;
        } else if constexpr (std::is_same_v<T, Connective>) {
          int own = op == MutOp::SConn ? 1 : 0;
          return own + count_sites(*node.lhs, op) + count_sites(*node.rhs, op);
        } else if constexpr (std::is_same_v<T, Implication>) {
          int own = op == MutOp::SSR ? 1 : 0;
          return own + count_sites(*node.antecedent, op) + count_sites(*node.consequent, op);
        } else if constexpr (std::is_same_v<T, StringFn>) {
          return op == MutOp::SSE ? 1 : 0;
        } else if constexpr (std::is_same_v<T, SubstringExpr>) {
          return op == MutOp::SSI ? 1 : 0;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return 0;
        } else {
          return op == MutOp::AD &&
                         std::get<LiteralExpr>(e.node).value.kind == Literal::Kind::Date
                     ? 1
                     : 0;
        }
      },
      e.node);
}

// Rewrites the `remaining`-th matching node (0-based, pre-order). Untouched
// subtrees are shared, not copied. Returns null when the site lies beyond
// this subtree, with `remaining` reduced by the number of sites passed.
inline ExprPtr rewrite_at(const ExprPtr& e, MutOp op, int& remaining, int date_variant) {
  const Expr& node = *e;
  if (const auto* c = std::get_if<Comparison>(&node.node)) {
    if (comparison_matches(*c, op)) {
      if (remaining == 0)
        return make_expr<Comparison>(swap_comparison(c->op), c->lhs, c->rhs);
      --remaining;
    }
    if (ExprPtr lhs = rewrite_at(c->lhs, op, remaining, date_variant))
      return make_expr<Comparison>(c->op, std::move(lhs), c->rhs);
    if (ExprPtr rhs = rewrite_at(c->rhs, op, remaining, date_variant))
      return make_expr<Comparison>(c->op, c->lhs, std::move(rhs));
    return nullptr;
  }
  if (const auto* m = std::get_if<Membership>(&node.node)) {
    if (op == MutOp::RI) {
      if (remaining == 0)
        return make_expr<Membership>(m->op == MemberOp::In ? MemberOp::NotIn : MemberOp::In,
                                     m->subject, m->values);
      --remaining;
    }
    if (ExprPtr subject = rewrite_at(m->subject, op, remaining, date_variant))
      return make_expr<Membership>(m->op, std::move(subject), m->values);
    if (op == MutOp::AD) {
      for (size_t i = 0; i < m->values.size(); ++i) {
        if (m->values[i].kind != Literal::Kind::Date) continue;
        if (remaining == 0) {
          std::vector<Literal> values = m->values;
          values[i] = Literal::make_date(alter_date(values[i].date, date_variant));
          return make_expr<Membership>(m->op, m->subject, std::move(values));
        }
        --remaining;
      }
    }
    return nullptr;
  }
  if (const auto* c = std::get_if<Connective>(&node.node)) {
    if (op == MutOp::SConn) {
      if (remaining == 0)
        return make_expr<Connective>(
            c->op == ConnectiveOp::And ? ConnectiveOp::Or : ConnectiveOp::And, c->lhs, c->rhs);
      --remaining;
    }
    if (ExprPtr lhs = rewrite_at(c->lhs, op, remaining, date_variant))
      return make_expr<Connective>(c->op, std::move(lhs), c->rhs);
    if (ExprPtr rhs = rewrite_at(c->rhs, op, remaining, date_variant))
      return make_expr<Connective>(c->op, c->lhs, std::move(rhs));
    return nullptr;
  }
  if (const auto* imp = std::get_if<Implication>(&node.node)) {
    if (op == MutOp::SSR) {
      if (remaining == 0) return make_expr<Implication>(imp->consequent, imp->antecedent);
      --remaining;
    }
    if (ExprPtr ante = rewrite_at(imp->antecedent, op, remaining, date_variant))
      return make_expr<Implication>(std::move(ante), imp->consequent);
    if (ExprPtr cons = rewrite_at(imp->consequent, op, remaining, date_variant))
      return make_expr<Implication>(imp->antecedent, std::move(cons));
    return nullptr;
  }
  if (const auto* fn = std::get_if<StringFn>(&node.node)) {
    if (op == MutOp::SSE) {
      if (remaining == 0)
        return make_expr<StringFn>(
            fn->fn == StringFnKind::StartsWith ? StringFnKind::EndsWith : StringFnKind::StartsWith,
            fn->var, fn->needle);
      --remaining;
    }
    return nullptr;
  }
  if (const auto* sub = std::get_if<SubstringExpr>(&node.node)) {
    if (op == MutOp::SSI) {
      if (remaining == 0) return make_expr<SubstringExpr>(sub->var, sub->to, sub->from);
      --remaining;
    }
    return nullptr;
  }
  if (const auto* lit = std::get_if<LiteralExpr>(&node.node)) {
    if (op == MutOp::AD && lit->value.kind == Literal::Kind::Date) {
      if (remaining == 0)
        return make_expr<LiteralExpr>(
            Literal::make_date(alter_date(lit->value.date, date_variant)));
      --remaining;
    }
    return nullptr;
  }
  return nullptr;  // VarRef
}

}  // namespace detail

// Site indices for (rule, operator): 0..n-1 in deterministic pre-order over
// the rule's expressions. AD indices encode (date literal ordinal, variant)
// as ordinal * 6 + variant.
inline std::vector<int> enumerate_sites(const Rule& rule, MutOp op) {
  int n = 0;
  for (const auto& expr : rule_expressions(rule)) n += detail::count_sites(*expr, op);
  if (op == MutOp::AD) n *= kDateVariantsPerLiteral;
  std::vector<int> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = i;
  return out;
}

struct Mutant {
  std::string rule_id;
  MutOp op = MutOp::NI;
  int site = 0;
  Rule mutated;
  std::string mutated_source;
  bool from_validation_rule = true;
};

inline Rule apply_operator(const Rule& rule, MutOp op, int site) {
  int node_index = site;
  int date_variant = 0;
  if (op == MutOp::AD) {
    node_index = site / kDateVariantsPerLiteral;
    date_variant = site % kDateVariantsPerLiteral;
  }
  if (site < 0) throw ConfigError("mutation site must be non-negative");

  auto rewrite_exprs = [&](std::vector<ExprPtr> exprs) -> std::optional<std::vector<ExprPtr>> {
    int remaining = node_index;
    for (auto& e : exprs) {
      if (ExprPtr replaced = detail::rewrite_at(e, op, remaining, date_variant)) {
        e = std::move(replaced);
        return exprs;
      }
    }
    return std::nullopt;
  };

  if (const auto* v = std::get_if<ValidationRule>(&rule)) {
    std::vector<ExprPtr> exprs;
    if (v->applicability) exprs.push_back(v->applicability);
    exprs.push_back(v->check);
    auto rewritten = rewrite_exprs(std::move(exprs));
    if (!rewritten)
      throw ConfigError("invalid mutation site " + std::to_string(site) + " for rule " + v->id);
    ValidationRule out = *v;
    size_t at = 0;
    if (out.applicability) out.applicability = (*rewritten)[at++];
    out.check = (*rewritten)[at];
    return out;
  }
  const auto& a = std::get<AggregationRule>(rule);
  std::vector<ExprPtr> exprs;
  for (const auto& b : a.branches) exprs.push_back(b.guard);
  auto rewritten = rewrite_exprs(std::move(exprs));
  if (!rewritten)
    throw ConfigError("invalid mutation site " + std::to_string(site) + " for rule " + a.id);
  AggregationRule out = a;
  for (size_t i = 0; i < out.branches.size(); ++i) out.branches[i].guard = (*rewritten)[i];
  return out;
}

// Exhaustive single-site enumeration: every operator, on every rule, at
// every possible location. Deterministic and order-stable.
inline std::vector<Mutant> generate_mutants(const RuleSetVersion& version) {
  std::vector<Mutant> out;
  auto expand = [&](const Rule& rule, bool from_validation) {
    for (MutOp op : all_mut_ops()) {
      for (int site : enumerate_sites(rule, op)) {
        Mutant m;
        m.rule_id = rule_id(rule);
        m.op = op;
        m.site = site;
        m.mutated = apply_operator(rule, op, site);
        m.mutated_source = format_rule(m.mutated);
        m.from_validation_rule = from_validation;
        out.push_back(std::move(m));
      }
    }
  };
  for (const auto& rule : version.validation) expand(Rule{rule}, true);
  for (const auto& rule : version.aggregation) expand(Rule{rule}, false);
  return out;
}

inline nlohmann::json mutants_to_json(const std::vector<Mutant>& mutants) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : mutants)
    out.push_back(nlohmann::json{{"rule-id", m.rule_id},
                                 {"operator", mut_op_name(m.op)},
                                 {"site", m.site},
                                 {"mutated-source", m.mutated_source}});
  return out;
}

inline std::vector<Mutant> mutants_from_json(const nlohmann::json& doc) {
  std::vector<Mutant> out;
  for (const auto& item : doc) {
    Mutant m;
    m.rule_id = item.at("rule-id").get<std::string>();
    auto op = mut_op_from(item.at("operator").get<std::string>());
    if (!op) throw LoadError("unknown mutation operator in mutant corpus");
    m.op = *op;
    m.site = item.at("site").get<int>();
    m.mutated_source = item.at("mutated-source").get<std::string>();
    m.mutated = parse_rule(m.mutated_source);
    m.from_validation_rule = std::holds_alternative<ValidationRule>(m.mutated);
    out.push_back(std::move(m));
  }
  return out;
}

struct OperatorKills {
  size_t total = 0;
  size_t killed = 0;
};

struct MutationReport {
  size_t total = 0;
  size_t killed = 0;
  size_t total_validation = 0;
  size_t killed_validation = 0;
  size_t total_aggregation = 0;
  size_t killed_aggregation = 0;
  size_t killed_by_construction = 0;
  double ms = 0;
  double ms_validation = 0;
  double ms_aggregation = 0;
  std::map<std::string, OperatorKills> per_operator;
  std::vector<std::vector<bool>> kill_matrix;  // mutant x test
  std::vector<std::string> construction_flagged;
};

struct MutationRunConfig {
  int jobs = 1;
};

namespace detail {

inline RuleSetVersion with_rule_replaced(const RuleSetVersion& version, const Mutant& mutant) {
  RuleSetVersion out = version;
  if (mutant.from_validation_rule) {
    for (auto& r : out.validation)
      if (r.id == mutant.rule_id) {
        r = std::get<ValidationRule>(mutant.mutated);
        break;
      }
  } else {
    for (auto& r : out.aggregation)
      if (r.id == mutant.rule_id) {
        r = std::get<AggregationRule>(mutant.mutated);
        break;
      }
  }
  return out;
}

}  // namespace detail

// Replays the suite against the engine with one rule replaced per mutant.
// Killed means at least one failing verdict. Mutants whose rewritten source
// no longer loads count as killed-by-construction and are flagged.
inline MutationReport run_mutation_testing(const TestSuite& suite, const RuleSetVersion& version,
                                           const std::vector<Mutant>& mutants,
                                           const VariableRegistry& registry,
                                           MutationRunConfig config = {}) {
  if (mutants.empty()) throw ConfigError("mutation testing requires at least one mutant");
  MutationReport report;
  report.total = mutants.size();
  report.kill_matrix.assign(mutants.size(), std::vector<bool>(suite.tests.size(), false));

  // byte flags, not vector<bool>: workers write disjoint indices concurrently
  std::vector<char> killed(mutants.size(), 0);
  std::vector<char> constructed(mutants.size(), 0);

  auto worker = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const Mutant& mutant = mutants[i];
      try {
        Rule reloaded = parse_rule(mutant.mutated_source);
        auto unknown = validate_references(reloaded, registry);
        if (!unknown.empty()) throw LoadError("unresolved references");
      } catch (const std::exception&) {
        constructed[i] = 1;
        killed[i] = 1;
        continue;
      }
      RuleSetVersion mutated = detail::with_rule_replaced(version, mutant);
      VersionRegistry versions;
      versions.put(std::move(mutated));
      ApiCore core(std::move(versions), registry);
      InProcessClient client(core);
      std::vector<Verdict> verdicts = replay_suite(suite, client);
      for (size_t t = 0; t < verdicts.size(); ++t) {
        if (verdicts[t].kind == VerdictKind::Fail) {
          report.kill_matrix[i][t] = true;
          killed[i] = 1;
        }
      }
    }
  };

  int jobs = std::max(1, config.jobs);
  if (jobs == 1 || mutants.size() < 2) {
    worker(0, mutants.size());
  } else {
    size_t chunk = (mutants.size() + static_cast<size_t>(jobs) - 1) / static_cast<size_t>(jobs);
    std::vector<std::future<void>> futures;
    for (size_t begin = 0; begin < mutants.size(); begin += chunk) {
      size_t end = std::min(begin + chunk, mutants.size());
      futures.push_back(std::async(std::launch::async, worker, begin, end));
    }
    for (auto& f : futures) f.get();
  }

  // Deterministic reduction in mutant order.
  for (size_t i = 0; i < mutants.size(); ++i) {
    const Mutant& m = mutants[i];
    auto& per_op = report.per_operator[mut_op_name(m.op)];
    ++per_op.total;
    if (m.from_validation_rule)
      ++report.total_validation;
    else
      ++report.total_aggregation;
    if (killed[i]) {
      ++report.killed;
      ++per_op.killed;
      if (m.from_validation_rule)
        ++report.killed_validation;
      else
        ++report.killed_aggregation;
    }
    if (constructed[i]) {
      ++report.killed_by_construction;
      report.construction_flagged.push_back(m.rule_id + "/" + mut_op_name(m.op) + "/" +
                                            std::to_string(m.site));
    }
  }
  report.ms = static_cast<double>(report.killed) / static_cast<double>(report.total);
  report.ms_validation =
      report.total_validation
          ? static_cast<double>(report.killed_validation) / static_cast<double>(report.total_validation)
          : 0.0;
  report.ms_aggregation =
      report.total_aggregation
          ? static_cast<double>(report.killed_aggregation) / static_cast<double>(report.total_aggregation)
          : 0.0;
  return report;
}

inline nlohmann::json mutation_report_to_json(const MutationReport& r, bool include_matrix = true) {
  nlohmann::json per_op = nlohmann::json::object();
  for (const auto& [name, k] : r.per_operator)
    per_op[name] = nlohmann::json{{"total", k.total}, {"killed", k.killed}};
  nlohmann::json out{{"total", r.total},
                     {"killed", r.killed},
                     {"ms", r.ms},
                     {"validation", nlohmann::json{{"total", r.total_validation},
                                                   {"killed", r.killed_validation},
                                                   {"ms", r.ms_validation}}},
                     {"aggregation", nlohmann::json{{"total", r.total_aggregation},
                                                    {"killed", r.killed_aggregation},
                                                    {"ms", r.ms_aggregation}}},
                     {"killed-by-construction", r.killed_by_construction},
                     {"construction-flagged", r.construction_flagged},
                     {"per-operator", std::move(per_op)}};
  if (include_matrix) {
    nlohmann::json matrix = nlohmann::json::array();
    for (const auto& row : r.kill_matrix) {
      nlohmann::json cells = nlohmann::json::array();
      for (bool b : row) cells.push_back(b ? 1 : 0);
      matrix.push_back(std::move(cells));
    }
    out["kill-matrix"] = std::move(matrix);
  }
  return out;
}

inline std::string mutation_report_to_csv(const MutationReport& r) {
  std::string out = "operator,total,killed,score\n";
  for (const auto& [name, k] : r.per_operator) {
    double score = k.total ? static_cast<double>(k.killed) / static_cast<double>(k.total) : 0.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    out += name + "," + std::to_string(k.total) + "," + std::to_string(k.killed) + "," + buf + "\n";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", r.ms);
  out += "ALL," + std::to_string(r.total) + "," + std::to_string(r.killed) + "," + buf + "\n";
  return out;
}

}  // namespace regula
