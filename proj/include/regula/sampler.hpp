#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "regula/registry.hpp"
#include "regula/rng.hpp"
#include "regula/schema.hpp"
#include "regula/value.hpp"

namespace regula {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sampling distribution (see docs/schema-format.md): each variable is
// independently absent with absent_probability, otherwise drawn uniformly
// from its constraint (strict) or from its kind's unconstrained universe
// (default). Under default, date values are malformed text with
// invalid_probability. Strict mode forces invalid_probability to 0.
struct SamplerConfig {
  SchemaMode mode = SchemaMode::Strict;
  double absent_probability = 0.2;
  double invalid_probability = 0.2;

  void validate() const {
    if (absent_probability < 0 || absent_probability > 1)
      throw ConfigError("absent probability must be in [0,1]");
    if (invalid_probability < 0 || invalid_probability > 1)
      throw ConfigError("invalid probability must be in [0,1]");
  }

  double effective_invalid() const {
    return mode == SchemaMode::Strict ? 0.0 : invalid_probability;
  }
};

namespace detail {

inline const char kCodeAlphabet[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
inline const char kTextAlphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

inline std::string random_code(Rng& rng) {
  size_t len = 1 + rng.bounded(4);
  std::string out;
  for (size_t i = 0; i < len; ++i) out.push_back(kCodeAlphabet[rng.bounded(36)]);
  return out;
}

inline std::string random_text(Rng& rng) {
  size_t len = 1 + rng.bounded(8);
  std::string out;
  for (size_t i = 0; i < len; ++i) out.push_back(kTextAlphabet[rng.bounded(62)]);
  return out;
}

inline Date random_date_between(Rng& rng, const Date& lo, const Date& hi) {
  std::int64_t a = serial_day(lo), b = serial_day(hi);
  std::int64_t span = b - a + 1;
  return civil_from_days(a + static_cast<std::int64_t>(rng.bounded(static_cast<std::uint32_t>(span))));
}

inline Date random_date(Rng& rng) {
  return random_date_between(rng, Date{1900, 1, 1}, Date{2035, 12, 31});
}

inline std::string malformed_date_text(Rng& rng) {
  switch (rng.bounded(4)) {
    case 0: {  // out-of-range month/day, e.g. 2020-13-45
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%04u-%02u-%02u", 1900 + rng.bounded(160),
                    13 + rng.bounded(80), 32 + rng.bounded(60));
      return buf;
    }
    case 1: {  // missing separators
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%08u", 19000101 + rng.bounded(1000000));
      return buf;
    }
    case 2:
      return random_text(rng);
    default: {  // calendar-invalid day for the month
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%04u-02-%02u", 1901 + 4 * rng.bounded(30),
                    30 + rng.bounded(2));
      return buf;
    }
  }
}

// Generator for the supported pattern subset: optional ^...$ anchors,
// literal characters, character classes with ranges, \d, and fixed {n}
// repetition. Enough for code-shaped patterns like ^C[0-9]{2}$.
inline std::string generate_from_pattern(Rng& rng, const std::string& pattern) {
  std::string out;
  size_t i = 0;
  size_t end = pattern.size();
  if (i < end && pattern[i] == '^') ++i;
  if (end > 0 && pattern[end - 1] == '$') --end;
  auto emit_repeated = [&](const std::string& choices, size_t& pos) {
    size_t repeat = 1;
    if (pos < end && pattern[pos] == '{') {
      size_t close = pattern.find('}', pos);
      if (close == std::string::npos)
        throw ConfigError("unsupported pattern (unterminated {n}): " + pattern);
      repeat = std::stoul(pattern.substr(pos + 1, close - pos - 1));
      pos = close + 1;
    }
    for (size_t k = 0; k < repeat; ++k)
      out.push_back(choices[rng.bounded(static_cast<std::uint32_t>(choices.size()))]);
  };
  while (i < end) {
    char c = pattern[i];
    if (c == '[') {
      size_t close = pattern.find(']', i);
      if (close == std::string::npos)
        throw ConfigError("unsupported pattern (unterminated class): " + pattern);
      std::string choices;
      for (size_t j = i + 1; j < close; ++j) {
        if (j + 2 < close && pattern[j + 1] == '-') {
          for (char ch = pattern[j]; ch <= pattern[j + 2]; ++ch) choices.push_back(ch);
          j += 2;
        } else {
          choices.push_back(pattern[j]);
        }
      }
      if (choices.empty()) throw ConfigError("unsupported pattern (empty class): " + pattern);
      i = close + 1;
      emit_repeated(choices, i);
    } else if (c == '\\' && i + 1 < end && pattern[i + 1] == 'd') {
      i += 2;
      emit_repeated("0123456789", i);
    } else if (c == '.' || c == '*' || c == '+' || c == '?' || c == '|' || c == '(') {
      throw ConfigError("unsupported pattern construct in: " + pattern);
    } else {
      ++i;
      std::string choice(1, c);
      emit_repeated(choice, i);
    }
  }
  return out;
}

}  // namespace detail

// One sampler per worker; the worker owns the RNG and the sampler draws from
// it, so interleaved campaign decisions and record sampling share one
// reproducible stream.
class Sampler {
 public:
  Sampler(const VariableRegistry& registry, SamplerConfig config, Rng& rng)
      : registry_(&registry), config_(config), rng_(rng) {
    config_.validate();
  }

  Record sample_record() {
    Record out;
    for (const auto& var : registry_->variables()) {
      if (rng_.chance(config_.absent_probability)) continue;
      out[var.name] = draw_value(var);
    }
    return out;
  }

  // Exactly one of: resample one present variable, drop one present
  // variable, add one absent variable. The choice is uniform over the three;
  // a choice with no candidate falls through to the next in that order.
  Record mutate_record(const Record& record) {
    if (registry_->size() == 0) throw ConfigError("cannot mutate against an empty registry");
    std::vector<const VariableConstraint*> present, absent;
    for (const auto& var : registry_->variables()) {
      if (record.count(var.name))
        present.push_back(&var);
      else
        absent.push_back(&var);
    }
    Record out = record;
    int choice = static_cast<int>(rng_.bounded(3));
    for (int step = 0; step < 3; ++step) {
      int op = (choice + step) % 3;
      if (op == 0 && !present.empty()) {  // resample
        const auto* var = present[rng_.bounded(static_cast<std::uint32_t>(present.size()))];
        Value old = out[var->name];
        for (int attempt = 0; attempt < 16; ++attempt) {
          Value fresh = draw_value(*var);
          if (!(fresh == old)) {
            out[var->name] = fresh;
            break;
          }
        }
        return out;
      }
      if (op == 1 && !present.empty()) {  // drop
        const auto* var = present[rng_.bounded(static_cast<std::uint32_t>(present.size()))];
        out.erase(var->name);
        return out;
      }
      if (op == 2 && !absent.empty()) {  // add
        const auto* var = absent[rng_.bounded(static_cast<std::uint32_t>(absent.size()))];
        out[var->name] = draw_value(*var);
        return out;
      }
    }
    return out;  // unreachable for a non-empty registry
  }

  const SamplerConfig& config() const { return config_; }

 private:
  Value draw_value(const VariableConstraint& var) {
    if (config_.mode == SchemaMode::Strict) return draw_strict(var);
    return draw_default(var);
  }

  Value draw_strict(const VariableConstraint& var) {
    if (const auto* e = std::get_if<EnumConstraint>(&var.constraint)) {
      return Value::code(e->values[rng_.bounded(static_cast<std::uint32_t>(e->values.size()))]);
    }
    if (const auto* r = std::get_if<RangeConstraint>(&var.constraint)) {
      std::uint64_t span = static_cast<std::uint64_t>(r->hi - r->lo) + 1;
      return Value::integer(r->lo +
                            static_cast<std::int64_t>(rng_.bounded(static_cast<std::uint32_t>(span))));
    }
    if (const auto* w = std::get_if<DateWindowConstraint>(&var.constraint)) {
      return Value::date_value(detail::random_date_between(rng_, w->earliest, w->latest));
    }
    if (const auto* p = std::get_if<PatternConstraint>(&var.constraint)) {
      return Value::code(detail::generate_from_pattern(rng_, p->pattern));
    }
    return draw_kind_universe(var.kind);
  }

  Value draw_default(const VariableConstraint& var) {
    if (var.kind == VariableKind::Date && rng_.chance(config_.effective_invalid()))
      return Value::date_text(detail::malformed_date_text(rng_));
    return draw_kind_universe(var.kind);
  }

  Value draw_kind_universe(VariableKind kind) {
    switch (kind) {
      case VariableKind::Code: return Value::code(detail::random_code(rng_));
      case VariableKind::Text: return Value::code(detail::random_text(rng_));
      case VariableKind::Integer:
        return Value::integer(static_cast<std::int64_t>(rng_.bounded(110000)) - 10000);
      case VariableKind::Date: return Value::date_value(detail::random_date(rng_));
    }
    return Value::code("");
  }

  const VariableRegistry* registry_;
  SamplerConfig config_;
  Rng& rng_;
};

}  // namespace regula
