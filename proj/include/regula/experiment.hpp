#pragma once

#include <array>
#include <filesystem>
#include <future>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "regula/campaign.hpp"
#include "regula/metrics.hpp"
#include "regula/stats.hpp"
#include "regula/suite.hpp"

namespace regula {

struct PlanTriple {
  Strategy strategy = Strategy::RandomBB;
  std::string version;
  SchemaMode mode = SchemaMode::Strict;

  std::string key() const {
    return std::string(strategy_name(strategy)) + "-" + version + "-" + schema_mode_name(mode);
  }
};

struct ExperimentPlan {
  std::vector<Strategy> strategies;
  std::vector<std::string> versions;
  std::vector<SchemaMode> modes;
  int repetitions = 30;
  int budget = 1000;
  std::uint64_t master_seed = 0;
  int jobs = 1;
  double absent_probability = 0.2;
  double invalid_probability = 0.2;

  void validate() const {
    if (repetitions < 1) throw ConfigError("experiment repetitions must be >= 1");
    if (budget < 1) throw ConfigError("experiment budget must be >= 1");
    if (strategies.empty() || versions.empty() || modes.empty())
      throw ConfigError("experiment plan needs strategies, versions, and modes");
  }

  std::vector<PlanTriple> triples() const {
    std::vector<PlanTriple> out;
    for (Strategy s : strategies)
      for (const auto& v : versions)
        for (SchemaMode m : modes) out.push_back({s, v, m});
    return out;
  }
};

// RMIT ordering: each repetition runs the full cartesian product in a
// permutation derived from (master seed, repetition index).
inline std::vector<PlanTriple> plan_order(const ExperimentPlan& plan, int repetition_index) {
  std::vector<PlanTriple> out = plan.triples();
  Rng rng(derive_seed(plan.master_seed, "plan-order", static_cast<std::uint64_t>(repetition_index)));
  for (size_t i = out.size(); i > 1; --i)
    std::swap(out[i - 1], out[rng.bounded(static_cast<std::uint32_t>(i))]);
  return out;
}

inline nlohmann::json plan_to_json(const ExperimentPlan& plan) {
  nlohmann::json strategies = nlohmann::json::array();
  for (Strategy s : plan.strategies) strategies.push_back(strategy_name(s));
  nlohmann::json modes = nlohmann::json::array();
  for (SchemaMode m : plan.modes) modes.push_back(schema_mode_name(m));
  return nlohmann::json{{"strategies", std::move(strategies)},
                        {"versions", plan.versions},
                        {"modes", std::move(modes)},
                        {"repetitions", plan.repetitions},
                        {"budget", plan.budget},
                        {"master-seed", plan.master_seed},
                        {"absent-probability", plan.absent_probability},
                        {"invalid-probability", plan.invalid_probability}};
}

inline ExperimentPlan plan_from_json(const nlohmann::json& doc) {
  ExperimentPlan plan;
  for (const auto& s : doc.at("strategies")) {
    auto st = strategy_from(s.get<std::string>());
    if (!st) throw ConfigError("unknown strategy '" + s.get<std::string>() + "'");
    plan.strategies.push_back(*st);
  }
  for (const auto& v : doc.at("versions")) plan.versions.push_back(v.get<std::string>());
  for (const auto& m : doc.at("modes")) {
    auto mode = schema_mode_from(m.get<std::string>());
    if (!mode) throw ConfigError("unknown schema mode '" + m.get<std::string>() + "'");
    plan.modes.push_back(*mode);
  }
  plan.repetitions = doc.value("repetitions", 30);
  plan.budget = doc.value("budget", 1000);
  plan.master_seed = doc.value("master-seed", std::uint64_t{0});
  plan.absent_probability = doc.value("absent-probability", 0.2);
  plan.invalid_probability = doc.value("invalid-probability", 0.2);
  return plan;
}

struct ExperimentOutcome {
  std::string directory;
  int completed = 0;
  std::vector<std::string> failures;  // "<rep>/<key>: error"
};

namespace detail {

struct SubRun {
  int repetition;
  PlanTriple triple;
};

inline void execute_sub_run(const ExperimentPlan& plan, const SubRun& sub,
                            const VariableRegistry& registry, const VersionRegistry& versions,
                            const std::string& out_dir) {
  CampaignConfig config;
  config.strategy = sub.triple.strategy;
  config.version = sub.triple.version;
  config.mode = sub.triple.mode;
  config.budget = plan.budget;
  config.absent_probability = plan.absent_probability;
  config.invalid_probability = plan.invalid_probability;
  config.seed = derive_seed(plan.master_seed, sub.triple.key(),
                            static_cast<std::uint64_t>(sub.repetition));

  // Each sub-run gets its own isolated engine instance.
  ApiCore core(versions, registry);
  InProcessClient client(core);
  CampaignResult result = run_campaign(config, client, registry);

  std::filesystem::path dir = std::filesystem::path(out_dir) / "runs" /
                              std::to_string(sub.repetition) / sub.triple.key();
  std::filesystem::create_directories(dir);
  save_suite(make_suite(config, result.archive), (dir / "suite.json").string());
  write_text_file((dir / "log.ndjson").string(), log_to_ndjson(result.log));
  const RuleSetVersion* version = versions.find(sub.triple.version);
  RunMetrics metrics = compute_run_metrics(result.log, *version);
  write_text_file((dir / "metrics.json").string(), run_metrics_to_json(metrics).dump(2) + "\n");
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

inline void write_report(const std::string& experiment_dir, const StatConfig& config = {});

// Runs the full plan. Sub-run failures are recorded and the experiment
// continues (fail-soft).
inline ExperimentOutcome run_experiment(const ExperimentPlan& plan,
                                        const std::string& manifest_path,
                                        const std::string& out_dir) {
  plan.validate();
  Manifest manifest = load_manifest(manifest_path);
  VariableRegistry registry = load_registry(manifest);
  VersionRegistry versions = VersionRegistry::load_all(manifest, registry);
  for (const auto& v : plan.versions)
    if (!versions.find(v)) throw ConfigError("unknown version '" + v + "' in experiment plan");

  std::filesystem::create_directories(out_dir);
  write_text_file((std::filesystem::path(out_dir) / "plan.json").string(),
                  plan_to_json(plan).dump(2) + "\n");

  ExperimentOutcome outcome;
  outcome.directory = out_dir;

  std::vector<detail::SubRun> sub_runs;
  for (int rep = 0; rep < plan.repetitions; ++rep)
    for (const auto& triple : plan_order(plan, rep)) sub_runs.push_back({rep, triple});

  int jobs = std::max(1, plan.jobs);
  std::vector<std::string> errors(sub_runs.size());
  auto worker = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      try {
        detail::execute_sub_run(plan, sub_runs[i], registry, versions, out_dir);
      } catch (const std::exception& e) {
        errors[i] = std::to_string(sub_runs[i].repetition) + "/" + sub_runs[i].triple.key() +
                    ": " + e.what();
      }
    }
  };
  if (jobs == 1) {
    worker(0, sub_runs.size());
  } else {
    size_t chunk = (sub_runs.size() + static_cast<size_t>(jobs) - 1) / static_cast<size_t>(jobs);
    std::vector<std::future<void>> futures;
    for (size_t begin = 0; begin < sub_runs.size(); begin += chunk)
      futures.push_back(
          std::async(std::launch::async, worker, begin, std::min(begin + chunk, sub_runs.size())));
    for (auto& f : futures) f.get();
  }
  for (auto& e : errors) {
    if (e.empty())
      ++outcome.completed;
    else
      outcome.failures.push_back(e);
  }

  nlohmann::json summary{{"completed", outcome.completed}, {"failures", outcome.failures}};
  write_text_file((std::filesystem::path(out_dir) / "summary.json").string(),
                  summary.dump(2) + "\n");
  if (outcome.completed > 0) write_report(out_dir);
  return outcome;
}

struct TreatmentReport {
  PlanTriple triple;
  std::map<std::string, double> mean;
  std::map<std::string, double> sd;
  // per metric: tool-comparison tallies against other strategies (same
  // version and mode) and OAS tallies against the other mode
  std::map<std::string, std::array<int, 3>> tool_cmp;  // <, =, >
  std::map<std::string, std::array<int, 3>> oas_cmp;
  std::map<std::string, double> oas_diff_mean;
  std::map<std::string, double> oas_diff_sd;
};

// Statistical pipeline over an experiment directory: per metric, a Friedman
// test across all (strategy, version, mode) treatments with repetitions as
// subjects; Benjamini-Yekutieli correction across the metric family; Nemenyi
// post-hoc separations; decisions demand separation plus a non-negligible
// A12.
inline void write_report(const std::string& experiment_dir, const StatConfig& config) {
  namespace fs = std::filesystem;
  ExperimentPlan plan = plan_from_json(
      nlohmann::json::parse(read_text_file((fs::path(experiment_dir) / "plan.json").string())));
  std::vector<PlanTriple> triples = plan.triples();

  // values[metric][treatment][repetition]
  std::map<std::string, std::vector<std::vector<double>>> values;
  std::vector<int> usable_reps;
  for (int rep = 0; rep < plan.repetitions; ++rep) {
    bool complete = true;
    for (const auto& t : triples)
      if (!fs::exists(fs::path(experiment_dir) / "runs" / std::to_string(rep) / t.key() /
                      "metrics.json"))
        complete = false;
    if (complete) usable_reps.push_back(rep);
  }
  for (int rep : usable_reps) {
    for (size_t ti = 0; ti < triples.size(); ++ti) {
      RunMetrics metrics = run_metrics_from_json(nlohmann::json::parse(read_text_file(
          (fs::path(experiment_dir) / "runs" / std::to_string(rep) / triples[ti].key() /
           "metrics.json")
              .string())));
      for (const auto& [metric, value] : metrics.values) {
        auto& slot = values[metric];
        if (slot.empty()) slot.assign(triples.size(), {});
        slot[ti].push_back(value);
      }
    }
  }

  // Friedman per metric, then one BY correction across the metric family.
  std::vector<std::string> metric_names;
  std::vector<double> friedman_p;
  std::map<std::string, std::vector<std::vector<bool>>> separations;
  for (const auto& [metric, per_treatment] : values) {
    metric_names.push_back(metric);
    double p = 1.0;
    if (usable_reps.size() >= 2 && triples.size() >= 2) {
      std::vector<std::vector<double>> matrix(usable_reps.size(),
                                              std::vector<double>(triples.size(), 0.0));
      for (size_t ti = 0; ti < triples.size(); ++ti)
        for (size_t ri = 0; ri < usable_reps.size(); ++ri)
          matrix[ri][ti] = per_treatment[ti][ri];
      try {
        p = friedman_test(matrix, config).p_value;
      } catch (const StatsError&) {
        p = 1.0;
      }
    }
    friedman_p.push_back(p);
  }
  std::vector<double> adjusted = by_adjust(friedman_p);
  for (size_t mi = 0; mi < metric_names.size(); ++mi) {
    const auto& metric = metric_names[mi];
    std::vector<std::vector<bool>> sep(triples.size(),
                                       std::vector<bool>(triples.size(), false));
    if (adjusted[mi] < config.alpha && usable_reps.size() >= 2 && triples.size() >= 2 &&
        triples.size() <= 20) {
      std::vector<std::vector<double>> matrix(usable_reps.size(),
                                              std::vector<double>(triples.size(), 0.0));
      const auto& per_treatment = values[metric];
      for (size_t ti = 0; ti < triples.size(); ++ti)
        for (size_t ri = 0; ri < usable_reps.size(); ++ri)
          matrix[ri][ti] = per_treatment[ti][ri];
      try {
        sep = nemenyi_posthoc(matrix, config).separated;
      } catch (const StatsError&) {
      }
    }
    separations[metric] = std::move(sep);
  }

  std::vector<TreatmentReport> reports(triples.size());
  for (size_t ti = 0; ti < triples.size(); ++ti) reports[ti].triple = triples[ti];

  for (const auto& metric : metric_names) {
    const auto& per_treatment = values[metric];
    const auto& sep = separations[metric];
    for (size_t i = 0; i < triples.size(); ++i) {
      auto& rep = reports[i];
      rep.mean[metric] = mean_of(per_treatment[i]);
      rep.sd[metric] = sd_of(per_treatment[i]);
      std::array<int, 3> tool{0, 0, 0};
      std::array<int, 3> oas{0, 0, 0};
      for (size_t j = 0; j < triples.size(); ++j) {
        if (i == j) continue;
        bool same_version = triples[i].version == triples[j].version;
        bool same_mode = triples[i].mode == triples[j].mode;
        bool same_strategy = triples[i].strategy == triples[j].strategy;
        Decision d = decide(per_treatment[i], per_treatment[j], sep[i][j]);
        if (same_version && same_mode && !same_strategy) {
          if (d == Decision::Worse) ++tool[0];
          else if (d == Decision::Same) ++tool[1];
          else ++tool[2];
        } else if (same_version && same_strategy && !same_mode) {
          if (d == Decision::Worse) ++oas[0];
          else if (d == Decision::Same) ++oas[1];
          else ++oas[2];
        }
      }
      rep.tool_cmp[metric] = tool;
      rep.oas_cmp[metric] = oas;
      // strict-minus-default differences, paired by repetition
      if (triples[i].mode == SchemaMode::Strict) {
        for (size_t j = 0; j < triples.size(); ++j) {
          if (triples[j].strategy == triples[i].strategy &&
              triples[j].version == triples[i].version && triples[j].mode == SchemaMode::Default) {
            std::vector<double> diffs;
            for (size_t r = 0; r < per_treatment[i].size() && r < per_treatment[j].size(); ++r)
              diffs.push_back(per_treatment[i][r] - per_treatment[j][r]);
            rep.oas_diff_mean[metric] = mean_of(diffs);
            rep.oas_diff_sd[metric] = sd_of(diffs);
          }
        }
      }
    }
  }

  // One CSV row per metric and treatment: Mean+-SD plus <, =, > tallies.
  std::string csv =
      "metric,strategy,version,mode,mean,sd,cmp_lt,cmp_eq,cmp_gt,"
      "oas_diff_mean,oas_diff_sd,oas_lt,oas_eq,oas_gt\n";
  for (const auto& metric : metric_names) {
    for (const auto& rep : reports) {
      const auto& tool = rep.tool_cmp.at(metric);
      const auto& oas = rep.oas_cmp.at(metric);
      bool has_diff = rep.oas_diff_mean.count(metric) > 0;
      csv += metric;
      csv += ",";
      csv += strategy_name(rep.triple.strategy);
      csv += ",";
      csv += rep.triple.version;
      csv += ",";
      csv += schema_mode_name(rep.triple.mode);
      csv += ",";
      csv += detail::format_double(rep.mean.at(metric));
      csv += ",";
      csv += detail::format_double(rep.sd.at(metric));
      csv += ",";
      csv += std::to_string(tool[0]) + "," + std::to_string(tool[1]) + "," +
             std::to_string(tool[2]) + ",";
      csv += has_diff ? detail::format_double(rep.oas_diff_mean.at(metric)) : "";
      csv += ",";
      csv += has_diff ? detail::format_double(rep.oas_diff_sd.at(metric)) : "";
      csv += ",";
      csv += std::to_string(oas[0]) + "," + std::to_string(oas[1]) + "," + std::to_string(oas[2]);
      csv += "\n";
    }
  }
  write_text_file((fs::path(experiment_dir) / "report.csv").string(), csv);

  nlohmann::json json_report;
  json_report["repetitions-used"] = usable_reps.size();
  nlohmann::json friedman = nlohmann::json::object();
  for (size_t mi = 0; mi < metric_names.size(); ++mi)
    friedman[metric_names[mi]] =
        nlohmann::json{{"p", friedman_p[mi]}, {"p-adjusted", adjusted[mi]}};
  json_report["friedman"] = std::move(friedman);
  nlohmann::json treatments = nlohmann::json::array();
  for (const auto& rep : reports) {
    nlohmann::json t;
    t["strategy"] = strategy_name(rep.triple.strategy);
    t["version"] = rep.triple.version;
    t["mode"] = schema_mode_name(rep.triple.mode);
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& metric : metric_names) {
      nlohmann::json m;
      m["mean"] = rep.mean.at(metric);
      m["sd"] = rep.sd.at(metric);
      const auto& tool = rep.tool_cmp.at(metric);
      m["tool-cmp"] = nlohmann::json{{"lt", tool[0]}, {"eq", tool[1]}, {"gt", tool[2]}};
      const auto& oas = rep.oas_cmp.at(metric);
      m["oas-cmp"] = nlohmann::json{{"lt", oas[0]}, {"eq", oas[1]}, {"gt", oas[2]}};
      if (rep.oas_diff_mean.count(metric)) {
        m["oas-diff-mean"] = rep.oas_diff_mean.at(metric);
        m["oas-diff-sd"] = rep.oas_diff_sd.at(metric);
      }
      metrics[metric] = std::move(m);
    }
    t["metrics"] = std::move(metrics);
    treatments.push_back(std::move(t));
  }
  json_report["treatments"] = std::move(treatments);
  write_text_file((fs::path(experiment_dir) / "report.json").string(),
                  json_report.dump(2) + "\n");
}

// Compares each treatment's aggregated result-frequency profile against an
// external baseline file (FrequencyProfile JSON) and writes
// baseline-comparison.json next to the report.
inline void write_baseline_comparison(const std::string& experiment_dir,
                                      const std::string& baseline_path) {
  namespace fs = std::filesystem;
  ExperimentPlan plan = plan_from_json(
      nlohmann::json::parse(read_text_file((fs::path(experiment_dir) / "plan.json").string())));
  FrequencyProfile baseline =
      frequency_profile_from_json(nlohmann::json::parse(read_text_file(baseline_path)));

  nlohmann::json treatments = nlohmann::json::array();
  for (const auto& triple : plan.triples()) {
    RuleResultCounts counts;
    int reps_used = 0;
    for (int rep = 0; rep < plan.repetitions; ++rep) {
      fs::path log_path =
          fs::path(experiment_dir) / "runs" / std::to_string(rep) / triple.key() / "log.ndjson";
      if (!fs::exists(log_path)) continue;
      ++reps_used;
      for (const auto& entry : log_from_ndjson(read_text_file(log_path.string())))
        accumulate_log_entry(counts, entry);
    }
    if (!reps_used) continue;
    FrequencyProfile profile = frequency_profile(counts);
    BaselineComparison cmp = compare_to_baseline(profile, baseline);
    treatments.push_back(nlohmann::json{
        {"strategy", strategy_name(triple.strategy)},
        {"version", triple.version},
        {"mode", schema_mode_name(triple.mode)},
        {"compared-rules", cmp.compared_rules},
        {"mean-absolute-difference",
         nlohmann::json{{"pass", cmp.mean_absolute_difference[0]},
                        {"fail", cmp.mean_absolute_difference[1]},
                        {"warning", cmp.mean_absolute_difference[2]},
                        {"notApplied", cmp.mean_absolute_difference[3]}}}});
  }
  nlohmann::json doc{{"baseline", baseline_path}, {"treatments", std::move(treatments)}};
  write_text_file((fs::path(experiment_dir) / "baseline-comparison.json").string(),
                  doc.dump(2) + "\n");
}

}  // namespace regula
