#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "regula/ast.hpp"
#include "regula/errors.hpp"
#include "regula/value.hpp"

namespace regula {

enum class RuleResult { Pass, Fail, Warning, NotApplied };

inline const char* rule_result_name(RuleResult r) {
  switch (r) {
    case RuleResult::Pass: return "Pass";
    case RuleResult::Fail: return "Fail";
    case RuleResult::Warning: return "Warning";
    case RuleResult::NotApplied: return "NotApplied";
  }
  return "?";
}

inline std::optional<RuleResult> rule_result_from(const std::string& s) {
  if (s == "Pass") return RuleResult::Pass;
  if (s == "Fail") return RuleResult::Fail;
  if (s == "Warning") return RuleResult::Warning;
  if (s == "NotApplied") return RuleResult::NotApplied;
  return std::nullopt;
}

namespace detail {

// Expression evaluation produces either a boolean or an EvalError; the two
// are mutually exclusive by construction.
using BoolOrError = std::variant<bool, EvalError>;
using ValueOrError = std::variant<Value, EvalError>;

inline ValueOrError resolve_operand(const Expr& e, const Record& record);

inline ValueOrError resolve_variable(const std::string& name, const Record& record) {
  auto it = record.find(name);
  if (it == record.end()) return EvalError{EvalErrorKind::MissingVariable, name};
  if (it->second.kind == ValueKind::DateText) {
    auto d = parse_date(it->second.text);
    if (!d) return EvalError{EvalErrorKind::DateParse, name};
    return Value::date_value(*d);
  }
  return it->second;
}

inline Value value_from_literal(const Literal& l) {
  switch (l.kind) {
    case Literal::Kind::Code: return Value::code(l.code);
    case Literal::Kind::Integer: return Value::integer(l.number);
    case Literal::Kind::Date: return Value::date_value(l.date);
  }
  return Value::code("");
}

inline ValueOrError resolve_operand(const Expr& e, const Record& record) {
  if (const auto* v = std::get_if<VarRef>(&e.node)) return resolve_variable(v->name, record);
  if (const auto* l = std::get_if<LiteralExpr>(&e.node)) return value_from_literal(l->value);
  if (const auto* s = std::get_if<SubstringExpr>(&e.node)) {
    ValueOrError base = resolve_variable(s->var, record);
    if (auto* err = std::get_if<EvalError>(&base)) return *err;
    const Value& val = std::get<Value>(base);
    if (val.kind != ValueKind::Code)
      return EvalError{EvalErrorKind::KindMismatch,
                       std::string("substring of ") + value_kind_name(val.kind)};
    auto len = static_cast<std::int64_t>(val.text.size());
    if (s->from > s->to || s->to > len)
      return EvalError{EvalErrorKind::SubstringRange, s->var};
    return Value::code(val.text.substr(static_cast<size_t>(s->from),
                                       static_cast<size_t>(s->to - s->from)));
  }
  return EvalError{EvalErrorKind::KindMismatch, "non-operand expression"};
}

inline BoolOrError compare_values(CompareOp op, const Value& a, const Value& b) {
  if (a.kind != b.kind)
    return EvalError{EvalErrorKind::KindMismatch, std::string(value_kind_name(a.kind)) + " vs " +
                                                      value_kind_name(b.kind)};
  int cmp = 0;
  switch (a.kind) {
    case ValueKind::Code: cmp = a.text.compare(b.text) < 0 ? -1 : (a.text == b.text ? 0 : 1); break;
    case ValueKind::Integer: cmp = a.number < b.number ? -1 : (a.number == b.number ? 0 : 1); break;
    case ValueKind::Date: {
      auto sa = serial_day(a.date), sb = serial_day(b.date);
      cmp = sa < sb ? -1 : (sa == sb ? 0 : 1);
      break;
    }
    case ValueKind::DateText:
      return EvalError{EvalErrorKind::DateParse, "unresolved date text"};
  }
  switch (op) {
    case CompareOp::Eq: return cmp == 0;
    case CompareOp::Ne: return cmp != 0;
    case CompareOp::Lt: return cmp < 0;
    case CompareOp::Le: return cmp <= 0;
    case CompareOp::Gt: return cmp > 0;
    case CompareOp::Ge: return cmp >= 0;
  }
  return false;
}

inline BoolOrError eval_expr(const Expr& e, const Record& record) {
  return std::visit(
      [&](const auto& node) -> BoolOrError {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          ValueOrError lhs = resolve_operand(*node.lhs, record);
          if (auto* err = std::get_if<EvalError>(&lhs)) return *err;
          ValueOrError rhs = resolve_operand(*node.rhs, record);
          if (auto* err = std::get_if<EvalError>(&rhs)) return *err;
          return compare_values(node.op, std::get<Value>(lhs), std::get<Value>(rhs));
        } else if constexpr (std::is_same_v<T, Membership>) {
          ValueOrError subject = resolve_operand(*node.subject, record);
          if (auto* err = std::get_if<EvalError>(&subject)) return *err;
          const Value& v = std::get<Value>(subject);
          // Kind homogeneity is checked before membership so a mismatch is an
          // error regardless of element position.
          for (const auto& lit : node.values) {
            Value lv = value_from_literal(lit);
            if (lv.kind != v.kind)
              return EvalError{EvalErrorKind::KindMismatch,
                               std::string(value_kind_name(v.kind)) + " vs " +
                                   value_kind_name(lv.kind)};
          }
          bool contained = false;
          for (const auto& lit : node.values) {
            if (value_from_literal(lit) == v) {
              contained = true;
              break;
            }
          }
          return node.op == MemberOp::In ? contained : !contained;
        } else if constexpr (std::is_same_v<T, Connective>) {
          // Short-circuit: errors in the unevaluated operand are suppressed.
          BoolOrError lhs = eval_expr(*node.lhs, record);
          if (auto* err = std::get_if<EvalError>(&lhs)) return *err;
          bool l = std::get<bool>(lhs);
          if (node.op == ConnectiveOp::And && !l) return false;
          if (node.op == ConnectiveOp::Or && l) return true;
          return eval_expr(*node.rhs, record);
        } else if constexpr (std::is_same_v<T, Implication>) {
          BoolOrError ante = eval_expr(*node.antecedent, record);
          if (auto* err = std::get_if<EvalError>(&ante)) return *err;
          if (!std::get<bool>(ante)) return true;
          return eval_expr(*node.consequent, record);
        } else if constexpr (std::is_same_v<T, StringFn>) {
          ValueOrError subject = resolve_variable(node.var, record);
          if (auto* err = std::get_if<EvalError>(&subject)) return *err;
          const Value& v = std::get<Value>(subject);
          if (v.kind != ValueKind::Code)
            return EvalError{EvalErrorKind::KindMismatch,
                             std::string("string function on ") + value_kind_name(v.kind)};
          const std::string& hay = v.text;
          const std::string& needle = node.needle.code;
          if (needle.size() > hay.size()) return false;
          if (node.fn == StringFnKind::StartsWith)
            return hay.compare(0, needle.size(), needle) == 0;
          return hay.compare(hay.size() - needle.size(), needle.size(), needle) == 0;
        } else {
          // Bare operands are not boolean expressions; the grammar does not
          // produce them in boolean position.
          return EvalError{EvalErrorKind::KindMismatch, "operand in boolean position"};
        }
      },
      e.node);
}

}  // namespace detail

struct RuleEvaluation {
  std::optional<RuleResult> result;          // exactly one of result / error is set
  std::optional<EvalError> error;
  bool has_output = false;                   // aggregation only
  std::optional<Literal> output;             // nullopt = declared null output
};

// apply => check. A missing variable while evaluating the applicability
// clause means the rule cannot be determined to apply: NotApplied. Any other
// applicability error, and every error inside the check, is an evaluation
// error.
inline RuleEvaluation eval_validation(const ValidationRule& rule, const Record& record) {
  RuleEvaluation out;
  if (rule.applicability) {
    detail::BoolOrError applies = detail::eval_expr(*rule.applicability, record);
    if (auto* err = std::get_if<EvalError>(&applies)) {
      if (err->kind == EvalErrorKind::MissingVariable) {
        out.result = RuleResult::NotApplied;
        return out;
      }
      out.error = *err;
      return out;
    }
    if (!std::get<bool>(applies)) {
      out.result = RuleResult::NotApplied;
      return out;
    }
  }
  detail::BoolOrError check = detail::eval_expr(*rule.check, record);
  if (auto* err = std::get_if<EvalError>(&check)) {
    out.error = *err;
    return out;
  }
  if (std::get<bool>(check))
    out.result = RuleResult::Pass;
  else
    out.result = rule.severity == Severity::Error ? RuleResult::Fail : RuleResult::Warning;
  return out;
}

// Ordered decision table; the first matching branch fires. Never NotApplied.
inline RuleEvaluation eval_aggregation(const AggregationRule& rule, const Record& record) {
  RuleEvaluation out;
  for (const auto& branch : rule.branches) {
    detail::BoolOrError guard = detail::eval_expr(*branch.guard, record);
    if (auto* err = std::get_if<EvalError>(&guard)) {
      out.error = *err;
      return out;
    }
    if (std::get<bool>(guard)) {
      out.result = branch.flag == BranchFlag::Ok ? RuleResult::Pass : RuleResult::Warning;
      out.has_output = true;
      out.output = branch.output;
      return out;
    }
  }
  if (rule.fallback) {
    out.result = rule.fallback->flag == BranchFlag::Ok ? RuleResult::Pass : RuleResult::Warning;
    out.has_output = true;
    out.output = rule.fallback->output;
    return out;
  }
  out.result = RuleResult::Fail;
  out.has_output = true;
  out.output = std::nullopt;
  return out;
}

struct OutcomeEntry {
  std::string rule;
  std::optional<RuleResult> result;
  std::optional<EvalError> error;
  bool has_output = false;
  std::optional<Literal> output;
};

using OutcomeVector = std::vector<OutcomeEntry>;

enum class RuleKind { Validation, Aggregation };

inline const char* rule_kind_name(RuleKind k) {
  return k == RuleKind::Validation ? "validation" : "aggregation";
}

}  // namespace regula
