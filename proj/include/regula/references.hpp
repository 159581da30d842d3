#pragma once

#include <functional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "regula/ast.hpp"

namespace regula {

inline void visit_variable_names(const Expr& e,
                                 const std::function<void(const std::string&)>& fn) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          visit_variable_names(*node.lhs, fn);
          visit_variable_names(*node.rhs, fn);
        } else if constexpr (std::is_same_v<T, Membership>) {
          visit_variable_names(*node.subject, fn);
        } else if constexpr (std::is_same_v<T, Connective>) {
          visit_variable_names(*node.lhs, fn);
          visit_variable_names(*node.rhs, fn);
        } else if constexpr (std::is_same_v<T, Implication>) {
          visit_variable_names(*node.antecedent, fn);
          visit_variable_names(*node.consequent, fn);
        } else if constexpr (std::is_same_v<T, StringFn>) {
          fn(node.var);
        } else if constexpr (std::is_same_v<T, SubstringExpr>) {
          fn(node.var);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          fn(node.name);
        }
      },
      e.node);
}

// Unknown variable names in first-mention order (deduplicated). Covers every
// VarRef, string-function subject, substring subject, and for aggregation
// rules the output variable.
template <typename HasVariableFn>
std::vector<std::string> validate_references_with(const Rule& r, HasVariableFn&& has_variable) {
  std::vector<std::string> unknown;
  std::set<std::string> seen;
  auto note = [&](const std::string& name) {
    if (!has_variable(name) && seen.insert(name).second) unknown.push_back(name);
  };
  for (const auto& expr : rule_expressions(r)) visit_variable_names(*expr, note);
  if (const auto* a = std::get_if<AggregationRule>(&r)) note(a->output_variable);
  return unknown;
}

}  // namespace regula
