#pragma once

#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "regula/registry.hpp"
#include "regula/value.hpp"

namespace regula {

enum class SchemaMode { Default, Strict };

inline const char* schema_mode_name(SchemaMode m) {
  return m == SchemaMode::Default ? "default" : "strict";
}

inline std::optional<SchemaMode> schema_mode_from(const std::string& s) {
  if (s == "default") return SchemaMode::Default;
  if (s == "strict") return SchemaMode::Strict;
  return std::nullopt;
}

// Schema document, bit-exact format in docs/schema-format.md. The default
// document lists fields with kinds only; strict additionally carries the
// registry constraints. Stripping every "constraint" key from the strict
// document yields the default document.
inline nlohmann::json schema_document(const VariableRegistry& registry,
                                      const std::string& version, SchemaMode mode) {
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& v : registry.variables()) {
    nlohmann::json f;
    f["name"] = v.name;
    f["kind"] = variable_kind_name(v.kind);
    if (mode == SchemaMode::Strict && !std::holds_alternative<NoConstraint>(v.constraint))
      f["constraint"] = constraint_to_json(v.constraint);
    fields.push_back(std::move(f));
  }
  return nlohmann::json{
      {"mode", schema_mode_name(mode)}, {"version", version}, {"fields", std::move(fields)}};
}

struct RecordValidation {
  Record record;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// The 400 layer. Structural rules (unknown field, wrong literal kind) apply
// in both modes; value constraints and date-text validity apply only under
// strict. Under default, a date field accepts any string: text that does not
// parse is carried into the record and fails at evaluation time instead.
inline RecordValidation validate_record_json(const nlohmann::json& body,
                                             const VariableRegistry& registry, SchemaMode mode) {
  RecordValidation out;
  if (!body.is_object()) {
    out.violations.push_back("body must be a JSON object");
    return out;
  }
  for (const auto& [key, value] : body.items()) {
    const VariableConstraint* var = registry.find(key);
    if (!var) {
      out.violations.push_back("unknown field '" + key + "'");
      continue;
    }
    switch (var->kind) {
      case VariableKind::Code:
      case VariableKind::Text: {
        if (!value.is_string()) {
          out.violations.push_back("field '" + key + "' must be a string");
          break;
        }
        std::string s = value.get<std::string>();
        if (mode == SchemaMode::Strict) {
          if (const auto* e = std::get_if<EnumConstraint>(&var->constraint)) {
            bool found = false;
            for (const auto& allowed : e->values)
              if (allowed == s) {
                found = true;
                break;
              }
            if (!found) {
              out.violations.push_back("field '" + key + "' value not in enum");
              break;
            }
          } else if (const auto* p = std::get_if<PatternConstraint>(&var->constraint)) {
            if (!std::regex_match(s, std::regex(p->pattern))) {
              out.violations.push_back("field '" + key + "' does not match pattern");
              break;
            }
          }
        }
        out.record[key] = Value::code(std::move(s));
        break;
      }
      case VariableKind::Integer: {
        if (!value.is_number_integer()) {
          out.violations.push_back("field '" + key + "' must be an integer");
          break;
        }
        std::int64_t n = value.get<std::int64_t>();
        if (mode == SchemaMode::Strict) {
          if (const auto* r = std::get_if<RangeConstraint>(&var->constraint)) {
            if (n < r->lo || n > r->hi) {
              out.violations.push_back("field '" + key + "' out of range");
              break;
            }
          }
        }
        out.record[key] = Value::integer(n);
        break;
      }
      case VariableKind::Date: {
        if (!value.is_string()) {
          out.violations.push_back("field '" + key + "' must be a string");
          break;
        }
        std::string s = value.get<std::string>();
        auto parsed = parse_date(s);
        if (mode == SchemaMode::Strict) {
          if (!parsed) {
            out.violations.push_back("field '" + key + "' is not a valid date");
            break;
          }
          if (const auto* w = std::get_if<DateWindowConstraint>(&var->constraint)) {
            if (*parsed < w->earliest || *parsed > w->latest) {
              out.violations.push_back("field '" + key + "' outside date window");
              break;
            }
          }
          out.record[key] = Value::date_value(*parsed);
        } else {
          out.record[key] = parsed ? Value::date_value(*parsed) : Value::date_text(std::move(s));
        }
        break;
      }
    }
  }
  return out;
}

inline nlohmann::json record_to_json(const Record& record) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, value] : record) {
    switch (value.kind) {
      case ValueKind::Code:
      case ValueKind::DateText: out[name] = value.text; break;
      case ValueKind::Integer: out[name] = value.number; break;
      case ValueKind::Date: out[name] = format_date(value.date); break;
    }
  }
  return out;
}

}  // namespace regula
