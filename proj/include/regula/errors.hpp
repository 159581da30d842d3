#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "regula/rng.hpp"

namespace regula {

enum class EvalErrorKind { MissingVariable, KindMismatch, SubstringRange, DateParse };

struct EvalError {
  EvalErrorKind kind = EvalErrorKind::MissingVariable;
  std::string detail;  // variable name or kind pair; never a record value
};

inline const char* eval_error_operation(EvalErrorKind k) {
  switch (k) {
    case EvalErrorKind::MissingVariable: return "resolve-variable";
    case EvalErrorKind::KindMismatch: return "compare-values";
    case EvalErrorKind::SubstringRange: return "substring";
    case EvalErrorKind::DateParse: return "parse-date";
  }
  return "?";
}

enum class ErrorCategory { Harness, IO, Remaining };

inline const char* error_category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Harness: return "Harness";
    case ErrorCategory::IO: return "IO";
    case ErrorCategory::Remaining: return "Remaining";
  }
  return "?";
}

struct ErrorFrame {
  std::string component;
  std::string operation;
  std::string detail;

  friend bool operator==(const ErrorFrame&, const ErrorFrame&) = default;
};

// Stack-trace analog. The first frame is the failure point; deeper frames
// give context (rule, endpoint).
struct ErrorSignature {
  std::vector<ErrorFrame> frames;

  friend bool operator==(const ErrorSignature&, const ErrorSignature&) = default;
};

inline nlohmann::json error_signature_to_json(const ErrorSignature& sig) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : sig.frames)
    frames.push_back({{"component", f.component}, {"operation", f.operation}, {"detail", f.detail}});
  return nlohmann::json{{"frames", std::move(frames)}};
}

inline ErrorSignature error_signature_from_json(const nlohmann::json& doc) {
  ErrorSignature sig;
  for (const auto& f : doc.at("frames"))
    sig.frames.push_back({f.value("component", ""), f.value("operation", ""), f.value("detail", "")});
  return sig;
}

// Which component names count as library (engine) code, harness plumbing,
// and transport for RQ2-style classification.
struct NamespaceConfig {
  std::set<std::string> engine_components = {"rule-engine", "rule-dsl"};
  std::set<std::string> harness_components = {"fault-injector", "campaign-harness"};
  std::set<std::string> io_components = {"http-client"};
};

struct ErrorClassification {
  std::uint64_t unique_error_key = 0;   // hash of the full frame list
  std::uint64_t failure_point_key = 0;  // hash of the first frame
  bool is_library = false;
  ErrorCategory category = ErrorCategory::Remaining;
};

inline std::uint64_t frame_key(const ErrorFrame& f, std::uint64_t h = 0xCBF29CE484222325ull) {
  h = fnv1a(f.component, h);
  h = fnv1a("\x1f", h);
  h = fnv1a(f.operation, h);
  h = fnv1a("\x1f", h);
  h = fnv1a(f.detail, h);
  h = fnv1a("\x1e", h);
  return h;
}

inline ErrorClassification classify_error(const ErrorSignature& sig,
                                          const NamespaceConfig& config = {}) {
  ErrorClassification out;
  if (sig.frames.empty()) return out;
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const auto& f : sig.frames) h = frame_key(f, h);
  out.unique_error_key = h;
  out.failure_point_key = frame_key(sig.frames.front());
  const std::string& first = sig.frames.front().component;
  out.is_library = config.engine_components.count(first) > 0;
  if (config.harness_components.count(first))
    out.category = ErrorCategory::Harness;
  else if (config.io_components.count(first))
    out.category = ErrorCategory::IO;
  else
    out.category = ErrorCategory::Remaining;
  return out;
}

}  // namespace regula
