#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "regula/ast.hpp"
#include "regula/references.hpp"
#include "regula/value.hpp"

namespace regula {

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VariableKind { Code, Integer, Date, Text };

inline const char* variable_kind_name(VariableKind k) {
  switch (k) {
    case VariableKind::Code: return "code";
    case VariableKind::Integer: return "integer";
    case VariableKind::Date: return "date";
    case VariableKind::Text: return "text";
  }
  return "?";
}

inline std::optional<VariableKind> variable_kind_from(const std::string& s) {
  if (s == "code") return VariableKind::Code;
  if (s == "integer") return VariableKind::Integer;
  if (s == "date") return VariableKind::Date;
  if (s == "text") return VariableKind::Text;
  return std::nullopt;
}

struct EnumConstraint {
  std::vector<std::string> values;
};
struct RangeConstraint {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};
struct DateWindowConstraint {
  Date earliest;
  Date latest;
};
struct PatternConstraint {
  std::string pattern;
};
struct NoConstraint {};

using Constraint =
    std::variant<NoConstraint, EnumConstraint, RangeConstraint, DateWindowConstraint,
                 PatternConstraint>;

struct VariableConstraint {
  std::string name;
  VariableKind kind = VariableKind::Code;
  Constraint constraint = NoConstraint{};
};

// Declaration order is preserved: it drives sampling order and the field
// order of schema documents.
class VariableRegistry {
 public:
  void add(VariableConstraint v) {
    index_[v.name] = variables_.size();
    variables_.push_back(std::move(v));
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  const VariableConstraint* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &variables_[it->second];
  }

  const std::vector<VariableConstraint>& variables() const { return variables_; }
  size_t size() const { return variables_.size(); }

 private:
  std::vector<VariableConstraint> variables_;
  std::unordered_map<std::string, size_t> index_;
};

inline std::vector<std::string> validate_references(const Rule& r,
                                                    const VariableRegistry& registry) {
  return validate_references_with(r, [&](const std::string& n) { return registry.has(n); });
}

namespace detail {

inline void validate_constraint(const VariableConstraint& v) {
  if (const auto* e = std::get_if<EnumConstraint>(&v.constraint)) {
    if (e->values.empty())
      throw LoadError("variable '" + v.name + "': enum constraint must list at least one value");
  } else if (const auto* r = std::get_if<RangeConstraint>(&v.constraint)) {
    if (r->lo > r->hi)
      throw LoadError("variable '" + v.name + "': range lower bound exceeds upper bound");
  } else if (const auto* w = std::get_if<DateWindowConstraint>(&v.constraint)) {
    if (serial_day(w->earliest) > serial_day(w->latest))
      throw LoadError("variable '" + v.name + "': date window is reversed");
  } else if (const auto* p = std::get_if<PatternConstraint>(&v.constraint)) {
    if (p->pattern.empty())
      throw LoadError("variable '" + v.name + "': empty pattern");
  }
}

}  // namespace detail

inline nlohmann::json constraint_to_json(const Constraint& c) {
  nlohmann::json out;
  if (const auto* e = std::get_if<EnumConstraint>(&c)) {
    out["type"] = "enum";
    out["values"] = e->values;
  } else if (const auto* r = std::get_if<RangeConstraint>(&c)) {
    out["type"] = "range";
    out["min"] = r->lo;
    out["max"] = r->hi;
  } else if (const auto* w = std::get_if<DateWindowConstraint>(&c)) {
    out["type"] = "date-window";
    out["earliest"] = format_date(w->earliest);
    out["latest"] = format_date(w->latest);
  } else if (const auto* p = std::get_if<PatternConstraint>(&c)) {
    out["type"] = "pattern";
    out["pattern"] = p->pattern;
  }
  return out;
}

inline VariableRegistry registry_from_json(const nlohmann::json& doc) {
  VariableRegistry reg;
  if (!doc.is_object() || !doc.contains("variables") || !doc["variables"].is_array())
    throw LoadError("variable registry: expected {\"variables\": [...]}");
  for (const auto& item : doc["variables"]) {
    VariableConstraint v;
    if (!item.contains("name") || !item["name"].is_string())
      throw LoadError("variable registry: entry without a name");
    v.name = item["name"].get<std::string>();
    if (reg.has(v.name)) throw LoadError("variable '" + v.name + "': declared twice");
    auto kind = item.contains("kind") && item["kind"].is_string()
                    ? variable_kind_from(item["kind"].get<std::string>())
                    : std::nullopt;
    if (!kind) throw LoadError("variable '" + v.name + "': unknown kind");
    v.kind = *kind;
    if (item.contains("constraint") && !item["constraint"].is_null()) {
      const auto& c = item["constraint"];
      std::string type = c.value("type", "");
      if (type == "enum") {
        EnumConstraint e;
        for (const auto& val : c.at("values")) e.values.push_back(val.get<std::string>());
        v.constraint = std::move(e);
      } else if (type == "range") {
        v.constraint = RangeConstraint{c.at("min").get<std::int64_t>(),
                                       c.at("max").get<std::int64_t>()};
      } else if (type == "date-window") {
        auto earliest = parse_date(c.at("earliest").get<std::string>());
        auto latest = parse_date(c.at("latest").get<std::string>());
        if (!earliest || !latest)
          throw LoadError("variable '" + v.name + "': invalid date in window");
        v.constraint = DateWindowConstraint{*earliest, *latest};
      } else if (type == "pattern") {
        v.constraint = PatternConstraint{c.at("pattern").get<std::string>()};
      } else {
        throw LoadError("variable '" + v.name + "': unknown constraint type '" + type + "'");
      }
    }
    detail::validate_constraint(v);
    reg.add(std::move(v));
  }
  return reg;
}

inline nlohmann::json registry_to_json(const VariableRegistry& reg) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : reg.variables()) {
    nlohmann::json item;
    item["name"] = v.name;
    item["kind"] = variable_kind_name(v.kind);
    if (!std::holds_alternative<NoConstraint>(v.constraint))
      item["constraint"] = constraint_to_json(v.constraint);
    vars.push_back(std::move(item));
  }
  return nlohmann::json{{"variables", std::move(vars)}};
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write file: " + path);
  out << content;
}

inline VariableRegistry load_variable_registry(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("variable registry " + path + ": " + e.what());
  }
  return registry_from_json(doc);
}

}  // namespace regula
