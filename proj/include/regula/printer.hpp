#pragma once

#include <sstream>
#include <string>
#include <variant>

#include "regula/ast.hpp"

namespace regula {

inline const char* compare_op_text(CompareOp op) {
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

inline std::string format_literal(const Literal& l) {
  switch (l.kind) {
    case Literal::Kind::Code: return "'" + l.code + "'";
    case Literal::Kind::Integer: return std::to_string(l.number);
    case Literal::Kind::Date: return "@" + format_date(l.date);
  }
  return "?";
}

namespace detail {

// Canonical text: atoms print bare; connective operands that are themselves
// connectives or implications are parenthesized; implications always print
// with explicit parentheses around antecedent and consequent.
inline void print_expr(std::ostringstream& out, const Expr& e, bool parenthesize_compound);

inline bool is_compound(const Expr& e) {
  return std::holds_alternative<Connective>(e.node) || std::holds_alternative<Implication>(e.node);
}

inline void print_operand(std::ostringstream& out, const Expr& e) {
  if (const auto* v = std::get_if<VarRef>(&e.node)) {
    out << v->name;
  } else if (const auto* l = std::get_if<LiteralExpr>(&e.node)) {
    out << format_literal(l->value);
  } else if (const auto* s = std::get_if<SubstringExpr>(&e.node)) {
    out << "substring(" << s->var << ", " << s->from << ", " << s->to << ")";
  } else {
    out << "<?>";
  }
}

inline void print_expr(std::ostringstream& out, const Expr& e, bool parenthesize_compound) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          print_operand(out, *node.lhs);
          out << " " << compare_op_text(node.op) << " ";
          print_operand(out, *node.rhs);
        } else if constexpr (std::is_same_v<T, Membership>) {
          print_operand(out, *node.subject);
          out << (node.op == MemberOp::In ? " in [" : " notIn [");
          for (size_t i = 0; i < node.values.size(); ++i) {
            if (i) out << ", ";
            out << format_literal(node.values[i]);
          }
          out << "]";
        } else if constexpr (std::is_same_v<T, Connective>) {
          bool paren = parenthesize_compound;
          if (paren) out << "(";
          print_expr(out, *node.lhs, is_compound(*node.lhs));
          out << (node.op == ConnectiveOp::And ? " and " : " or ");
          print_expr(out, *node.rhs, is_compound(*node.rhs));
          if (paren) out << ")";
        } else if constexpr (std::is_same_v<T, Implication>) {
          bool paren = parenthesize_compound;
          if (paren) out << "(";
          out << "(";
          print_expr(out, *node.antecedent, false);
          out << ") implies (";
          print_expr(out, *node.consequent, false);
          out << ")";
          if (paren) out << ")";
        } else if constexpr (std::is_same_v<T, StringFn>) {
          out << (node.fn == StringFnKind::StartsWith ? "startswith(" : "endswith(") << node.var
              << ", " << format_literal(node.needle) << ")";
        } else {
          print_operand(out, e);
        }
      },
      e.node);
}

}  // namespace detail

inline std::string format_expr(const ExprPtr& e) {
  std::ostringstream out;
  detail::print_expr(out, *e, false);
  return out.str();
}

// Deterministic canonical source; parse(format_rule(r)) is structurally
// identical to r.
inline std::string format_rule(const Rule& r) {
  std::ostringstream out;
  if (const auto* v = std::get_if<ValidationRule>(&r)) {
    out << "rule " << v->id << ":";
    if (v->applicability) out << " when " << format_expr(v->applicability);
    out << " check " << format_expr(v->check);
    out << " severity " << (v->severity == Severity::Error ? "error" : "warning");
  } else {
    const auto& a = std::get<AggregationRule>(r);
    out << "agg " << a.id << " -> " << a.output_variable << ":";
    bool first = true;
    for (const auto& b : a.branches) {
      if (!first) out << " ;";
      first = false;
      out << " " << format_expr(b.guard) << " => "
          << (b.output ? format_literal(*b.output) : "null");
      if (b.flag == BranchFlag::Dubious) out << " dubious";
    }
    if (a.fallback) {
      out << " ; else => " << (a.fallback->output ? format_literal(*a.fallback->output) : "null");
      if (a.fallback->flag == BranchFlag::Dubious) out << " dubious";
    }
  }
  return out.str();
}

}  // namespace regula
