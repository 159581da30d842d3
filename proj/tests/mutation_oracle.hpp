#pragma once

// Independent brute-force mutant enumerator used as the oracle for
// generate_mutants. It never builds a mutated AST: it walks each rule with
// its own traversal and prints the mutated source directly, emitting the
// rewritten text at the target node. Shares nothing with the production
// enumerator except the AST type and date formatting.

#include <string>
#include <vector>

#include "regula/ast.hpp"
#include "regula/mutation.hpp"

namespace regula::test {

struct OracleMutant {
  std::string rule_id;
  MutOp op;
  std::string source;
};

namespace oracle_detail {

struct Walk {
  MutOp op;
  int target = -1;   // node ordinal to mutate; -1 counts sites only
  int variant = 0;   // AD sub-key
  int seen = 0;
  bool mutated = false;
};

inline std::string lit(const Literal& l) {
  switch (l.kind) {
    case Literal::Kind::Code: return "'" + l.code + "'";
    case Literal::Kind::Integer: return std::to_string(l.number);
    case Literal::Kind::Date: return "@" + format_date(l.date);
  }
  return "?";
}

inline std::string cmp_text(CompareOp op, bool flip_ni, bool flip_scomp) {
  if (flip_ni) {
    if (op == CompareOp::Eq) return "!=";
    if (op == CompareOp::Ne) return "=";
  }
  if (flip_scomp) {
    switch (op) {
      case CompareOp::Gt: return "<=";
      case CompareOp::Le: return ">";
      case CompareOp::Lt: return ">=";
      case CompareOp::Ge: return "<";
      default: break;
    }
  }
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

inline std::string date_lit_maybe_altered(const Literal& l, Walk& w) {
  if (l.kind == Literal::Kind::Date && (w.op == MutOp::AD)) {
    int here = w.seen++;
    if (here == w.target) {
      w.mutated = true;
      return "@" + format_date(alter_date(l.date, w.variant));
    }
  }
  return lit(l);
}

inline bool compound(const Expr& e) {
  return std::holds_alternative<Connective>(e.node) ||
         std::holds_alternative<Implication>(e.node);
}

inline std::string operand(const Expr& e, Walk& w) {
  if (const auto* v = std::get_if<VarRef>(&e.node)) return v->name;
  if (const auto* l = std::get_if<LiteralExpr>(&e.node)) return date_lit_maybe_altered(l->value, w);
  const auto& s = std::get<SubstringExpr>(e.node);
  bool here = false;
  if (w.op == MutOp::SSI) {
    int idx = w.seen++;
    here = idx == w.target;
    if (here) w.mutated = true;
  }
  auto from = here ? s.to : s.from;
  auto to = here ? s.from : s.to;
  return "substring(" + s.var + ", " + std::to_string(from) + ", " + std::to_string(to) + ")";
}

inline std::string expr(const Expr& e, Walk& w, bool paren) {
  if (const auto* c = std::get_if<Comparison>(&e.node)) {
    bool here = false;
    bool ni_site = c->op == CompareOp::Eq || c->op == CompareOp::Ne;
    bool scomp_site = !ni_site;
    if ((w.op == MutOp::NI && ni_site) || (w.op == MutOp::SComp && scomp_site)) {
      int idx = w.seen++;
      here = idx == w.target;
      if (here) w.mutated = true;
    }
    std::string lhs = operand(*c->lhs, w);
    std::string op_text = cmp_text(c->op, here && w.op == MutOp::NI, here && w.op == MutOp::SComp);
    std::string rhs = operand(*c->rhs, w);
    return lhs + " " + op_text + " " + rhs;
  }
  if (const auto* m = std::get_if<Membership>(&e.node)) {
    bool here = false;
    if (w.op == MutOp::RI) {
      int idx = w.seen++;
      here = idx == w.target;
      if (here) w.mutated = true;
    }
    std::string subject = operand(*m->subject, w);
    std::string out = subject;
    bool in_op = m->op == MemberOp::In;
    if (here) in_op = !in_op;
    out += in_op ? " in [" : " notIn [";
    for (size_t i = 0; i < m->values.size(); ++i) {
      if (i) out += ", ";
      out += date_lit_maybe_altered(m->values[i], w);
    }
    out += "]";
    return out;
  }
  if (const auto* c = std::get_if<Connective>(&e.node)) {
    bool here = false;
    if (w.op == MutOp::SConn) {
      int idx = w.seen++;
      here = idx == w.target;
      if (here) w.mutated = true;
    }
    bool is_and = c->op == ConnectiveOp::And;
    if (here) is_and = !is_and;
    std::string out;
    if (paren) out += "(";
    out += expr(*c->lhs, w, compound(*c->lhs));
    out += is_and ? " and " : " or ";
    out += expr(*c->rhs, w, compound(*c->rhs));
    if (paren) out += ")";
    return out;
  }
  if (const auto* imp = std::get_if<Implication>(&e.node)) {
    bool here = false;
    if (w.op == MutOp::SSR) {
      int idx = w.seen++;
      here = idx == w.target;
      if (here) w.mutated = true;
    }
    const Expr& first = here ? *imp->consequent : *imp->antecedent;
    const Expr& second = here ? *imp->antecedent : *imp->consequent;
    std::string out;
    if (paren) out += "(";
    out += "(" + expr(first, w, false) + ") implies (" + expr(second, w, false) + ")";
    if (paren) out += ")";
    return out;
  }
  if (const auto* fn = std::get_if<StringFn>(&e.node)) {
    bool here = false;
    if (w.op == MutOp::SSE) {
      int idx = w.seen++;
      here = idx == w.target;
      if (here) w.mutated = true;
    }
    bool starts = fn->fn == StringFnKind::StartsWith;
    if (here) starts = !starts;
    return std::string(starts ? "startswith(" : "endswith(") + fn->var + ", " + lit(fn->needle) +
           ")";
  }
  return operand(e, w);
}

inline std::string print_rule(const Rule& rule, Walk& w) {
  std::string out;
  if (const auto* v = std::get_if<ValidationRule>(&rule)) {
    out = "rule " + v->id + ":";
    if (v->applicability) out += " when " + expr(*v->applicability, w, false);
    out += " check " + expr(*v->check, w, false);
    out += std::string(" severity ") + (v->severity == Severity::Error ? "error" : "warning");
  } else {
    const auto& a = std::get<AggregationRule>(rule);
    out = "agg " + a.id + " -> " + a.output_variable + ":";
    bool first = true;
    for (const auto& b : a.branches) {
      if (!first) out += " ;";
      first = false;
      out += " " + expr(*b.guard, w, false) + " => " + (b.output ? lit(*b.output) : "null");
      if (b.flag == BranchFlag::Dubious) out += " dubious";
    }
    if (a.fallback) {
      out += " ; else => " + std::string(a.fallback->output ? lit(*a.fallback->output) : "null");
      if (a.fallback->flag == BranchFlag::Dubious) out += " dubious";
    }
  }
  return out;
}

}  // namespace oracle_detail

inline int oracle_count_sites(const Rule& rule, MutOp op) {
  oracle_detail::Walk w;
  w.op = op;
  w.target = -1;
  oracle_detail::print_rule(rule, w);
  return w.seen;
}

inline std::vector<OracleMutant> oracle_enumerate(const Rule& rule) {
  std::vector<OracleMutant> out;
  for (MutOp op : all_mut_ops()) {
    int sites = oracle_count_sites(rule, op);
    int variants = op == MutOp::AD ? kDateVariantsPerLiteral : 1;
    for (int s = 0; s < sites; ++s) {
      for (int v = 0; v < variants; ++v) {
        oracle_detail::Walk w;
        w.op = op;
        w.target = s;
        w.variant = v;
        std::string source = oracle_detail::print_rule(rule, w);
        if (!w.mutated) continue;
        out.push_back({rule_id(rule), op, std::move(source)});
      }
    }
  }
  return out;
}

}  // namespace regula::test
