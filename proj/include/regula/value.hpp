#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "regula/date.hpp"

namespace regula {

// Record values. Code covers both code-strings and free text; DateText is an
// unparsed date payload that only exists under the default schema, where date
// fields are accepted as free strings and parsing is deferred to evaluation.
enum class ValueKind { Code, Integer, Date, DateText };

inline const char* value_kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Code: return "code";
    case ValueKind::Integer: return "integer";
    case ValueKind::Date: return "date";
    case ValueKind::DateText: return "date";
  }
  return "?";
}

struct Value {
  ValueKind kind = ValueKind::Code;
  std::string text;          // Code, DateText
  std::int64_t number = 0;   // Integer
  Date date;                 // Date

  static Value code(std::string s) {
    Value v;
    v.kind = ValueKind::Code;
    v.text = std::move(s);
    return v;
  }
  static Value integer(std::int64_t n) {
    Value v;
    v.kind = ValueKind::Integer;
    v.number = n;
    return v;
  }
  static Value date_value(const Date& d) {
    Value v;
    v.kind = ValueKind::Date;
    v.date = d;
    return v;
  }
  static Value date_text(std::string raw) {
    Value v;
    v.kind = ValueKind::DateText;
    v.text = std::move(raw);
    return v;
  }

  friend bool operator==(const Value& a, const Value& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case ValueKind::Code:
      case ValueKind::DateText: return a.text == b.text;
      case ValueKind::Integer: return a.number == b.number;
      case ValueKind::Date: return a.date == b.date;
    }
    return false;
  }
};

// One request body: variable name -> value. Absence is absence of the key.
using Record = std::map<std::string, Value>;

}  // namespace regula
