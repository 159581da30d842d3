#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "regula/date.hpp"

namespace regula {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class MemberOp { In, NotIn };
enum class ConnectiveOp { And, Or };
enum class StringFnKind { StartsWith, EndsWith };
enum class Severity { Error, Warning };
enum class BranchFlag { Ok, Dubious };

struct Literal {
  enum class Kind { Code, Integer, Date };
  Kind kind = Kind::Code;
  std::string code;
  std::int64_t number = 0;
  Date date;

  static Literal make_code(std::string s) {
    Literal l;
    l.kind = Kind::Code;
    l.code = std::move(s);
    return l;
  }
  static Literal make_integer(std::int64_t n) {
    Literal l;
    l.kind = Kind::Integer;
    l.number = n;
    return l;
  }
  static Literal make_date(const Date& d) {
    Literal l;
    l.kind = Kind::Date;
    l.date = d;
    return l;
  }

  friend bool operator==(const Literal& a, const Literal& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Code: return a.code == b.code;
      case Kind::Integer: return a.number == b.number;
      case Kind::Date: return a.date == b.date;
    }
    return false;
  }
};

struct Expr;
// Expressions are immutable once built; mutation rewrites share untouched
// subtrees instead of deep-copying.
using ExprPtr = std::shared_ptr<const Expr>;

struct Comparison {
  CompareOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Membership {
  MemberOp op;
  ExprPtr subject;
  std::vector<Literal> values;  // order preserved exactly as parsed
};

struct Connective {
  ConnectiveOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Implication {
  ExprPtr antecedent;
  ExprPtr consequent;
};

struct StringFn {
  StringFnKind fn;
  std::string var;
  Literal needle;  // always a code literal
};

struct SubstringExpr {
  std::string var;
  std::int64_t from = 0;  // non-negative; from <= to is NOT guaranteed (SSI mutants)
  std::int64_t to = 0;
};

struct VarRef {
  std::string name;
};

struct LiteralExpr {
  Literal value;
};

struct Expr {
  std::variant<Comparison, Membership, Connective, Implication, StringFn, SubstringExpr, VarRef,
               LiteralExpr>
      node;
};

template <typename T, typename... Args>
ExprPtr make_expr(Args&&... args) {
  return std::make_shared<const Expr>(Expr{T{std::forward<Args>(args)...}});
}

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b);

inline bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Comparison>) {
          return lhs.op == rhs.op && expr_equal(lhs.lhs, rhs.lhs) && expr_equal(lhs.rhs, rhs.rhs);
        } else if constexpr (std::is_same_v<T, Membership>) {
          return lhs.op == rhs.op && expr_equal(lhs.subject, rhs.subject) &&
                 lhs.values == rhs.values;
        } else if constexpr (std::is_same_v<T, Connective>) {
          return lhs.op == rhs.op && expr_equal(lhs.lhs, rhs.lhs) && expr_equal(lhs.rhs, rhs.rhs);
        } else if constexpr (std::is_same_v<T, Implication>) {
          return expr_equal(lhs.antecedent, rhs.antecedent) &&
                 expr_equal(lhs.consequent, rhs.consequent);
        } else if constexpr (std::is_same_v<T, StringFn>) {
          return lhs.fn == rhs.fn && lhs.var == rhs.var && lhs.needle == rhs.needle;
        } else if constexpr (std::is_same_v<T, SubstringExpr>) {
          return lhs.var == rhs.var && lhs.from == rhs.from && lhs.to == rhs.to;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return lhs.name == rhs.name;
        } else {
          return std::get<LiteralExpr>(a.node).value == rhs.value;
        }
      },
      a.node);
}

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a == b) return true;
  return expr_equal(*a, *b);
}

struct ValidationRule {
  std::string id;
  ExprPtr applicability;  // null means the rule always applies
  ExprPtr check;
  Severity severity = Severity::Error;
};

struct AggBranch {
  ExprPtr guard;                   // null only for the fallback branch
  std::optional<Literal> output;   // nullopt renders as `null`
  BranchFlag flag = BranchFlag::Ok;

  friend bool operator==(const AggBranch& a, const AggBranch& b) {
    return expr_equal(a.guard, b.guard) && a.output == b.output && a.flag == b.flag;
  }
};

struct AggregationRule {
  std::string id;
  std::string output_variable;
  std::vector<AggBranch> branches;
  std::optional<AggBranch> fallback;
};

using Rule = std::variant<ValidationRule, AggregationRule>;

inline const std::string& rule_id(const Rule& r) {
  if (const auto* v = std::get_if<ValidationRule>(&r)) return v->id;
  return std::get<AggregationRule>(r).id;
}

inline bool is_validation(const Rule& r) { return std::holds_alternative<ValidationRule>(r); }

inline bool rule_equal(const Rule& a, const Rule& b) {
  if (a.index() != b.index()) return false;
  if (const auto* va = std::get_if<ValidationRule>(&a)) {
    const auto& vb = std::get<ValidationRule>(b);
    return va->id == vb.id && va->severity == vb.severity &&
           expr_equal(va->applicability, vb.applicability) && expr_equal(va->check, vb.check);
  }
  const auto& aa = std::get<AggregationRule>(a);
  const auto& ab = std::get<AggregationRule>(b);
  return aa.id == ab.id && aa.output_variable == ab.output_variable &&
         aa.branches == ab.branches && aa.fallback == ab.fallback;
}

// All expressions of a rule in evaluation order; mutation sites are numbered
// by a pre-order walk over this sequence.
inline std::vector<ExprPtr> rule_expressions(const Rule& r) {
  std::vector<ExprPtr> out;
  if (const auto* v = std::get_if<ValidationRule>(&r)) {
    if (v->applicability) out.push_back(v->applicability);
    out.push_back(v->check);
  } else {
    for (const auto& b : std::get<AggregationRule>(r).branches) out.push_back(b.guard);
  }
  return out;
}

}  // namespace regula
