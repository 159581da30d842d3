// regula: a versioned medical-style rule engine behind an HTTP API, plus the
// black-box test generation, rule mutation, and comparison tooling around it.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "regula/api.hpp"
#include "regula/campaign.hpp"
#include "regula/experiment.hpp"
#include "regula/http_client.hpp"
#include "regula/http_service.hpp"
#include "regula/metrics.hpp"
#include "regula/mutation.hpp"
#include "regula/suite.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

std::uint64_t seed_or_env(std::uint64_t seed_flag) {
  if (const char* env = std::getenv("REGULA_SEED")) return std::strtoull(env, nullptr, 10);
  return seed_flag;
}

std::optional<std::pair<std::string, int>> split_server(const std::string& server) {
  auto colon = server.rfind(':');
  if (colon == std::string::npos) return std::nullopt;
  return std::make_pair(server.substr(0, colon), std::stoi(server.substr(colon + 1)));
}

regula::SchemaMode parse_mode(const std::string& mode) {
  auto m = regula::schema_mode_from(mode);
  if (!m) throw regula::ConfigError("unknown schema mode '" + mode + "'");
  return *m;
}

regula::Strategy parse_strategy(const std::string& name) {
  auto s = regula::strategy_from(name);
  if (!s) throw regula::ConfigError("unknown strategy '" + name + "'");
  return *s;
}

int cmd_serve(const std::string& manifest, int port, std::uint64_t seed,
              const std::string& inject_path) {
  std::optional<regula::InjectProfile> inject;
  if (!inject_path.empty()) {
    auto doc = nlohmann::json::parse(regula::read_text_file(inject_path));
    regula::InjectProfile profile;
    profile.name = doc.value("name", "default");
    profile.probability = doc.value("probability", 0.0);
    profile.endpoint = doc.value("endpoint", "any");
    inject = profile;
  }
  regula::HttpService service(regula::make_api_core(manifest, seed_or_env(seed), inject));
  int bound = service.start(port);
  std::cout << "listening on port " << bound << "\n";
  std::cout.flush();
  // Runs until interrupted.
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(60));
  return kExitOk;
}

int cmd_schema(const std::string& manifest, const std::string& version, const std::string& mode,
               const std::string& out) {
  regula::ApiCore core = regula::make_api_core(manifest);
  regula::ApiResponse response = core.schema(version, mode);
  if (response.status != 200) {
    std::cerr << response.body.dump() << "\n";
    return kExitConfigError;
  }
  std::string text = response.body.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    regula::write_text_file(out, text);
  return kExitOk;
}

int cmd_sample(const std::string& manifest, const std::string& mode, std::uint64_t seed, int count,
               double absent_probability, double invalid_probability) {
  regula::Manifest m = regula::load_manifest(manifest);
  regula::VariableRegistry registry = regula::load_registry(m);
  regula::SamplerConfig config;
  config.mode = parse_mode(mode);
  config.absent_probability = absent_probability;
  config.invalid_probability = invalid_probability;
  regula::Rng rng(seed_or_env(seed));
  regula::Sampler sampler(registry, config, rng);
  for (int i = 0; i < count; ++i)
    std::cout << regula::record_to_json(sampler.sample_record()).dump() << "\n";
  return kExitOk;
}

int cmd_generate(const std::string& manifest, const std::string& strategy,
                 const std::string& version, const std::string& mode, int budget,
                 std::uint64_t seed, const std::string& suite_out, const std::string& log_out,
                 const std::string& server) {
  regula::Manifest m = regula::load_manifest(manifest);
  regula::VariableRegistry registry = regula::load_registry(m);

  regula::CampaignConfig config;
  config.strategy = parse_strategy(strategy);
  config.version = version;
  config.mode = parse_mode(mode);
  config.budget = budget;
  config.seed = seed_or_env(seed);

  regula::CampaignResult result;
  if (server.empty()) {
    regula::VersionRegistry versions = regula::VersionRegistry::load_all(m, registry);
    if (!versions.find(version)) throw regula::ConfigError("unknown version '" + version + "'");
    regula::ApiCore core(std::move(versions), registry);
    regula::InProcessClient client(core);
    result = regula::run_campaign(config, client, registry);
  } else {
    auto host_port = split_server(server);
    if (!host_port) throw regula::ConfigError("--server expects host:port");
    regula::HttpClient client(host_port->first, host_port->second);
    result = regula::run_campaign(config, client, registry);
  }

  if (!suite_out.empty()) regula::save_suite(regula::make_suite(config, result.archive), suite_out);
  if (!log_out.empty()) regula::write_text_file(log_out, regula::log_to_ndjson(result.log));
  std::cout << "requests: " << result.log.size() << "\n"
            << "retained tests: " << result.archive.retained.size() << "\n"
            << "covered targets: " << result.archive.covered.size() << "\n";
  if (result.aborted) {
    std::cerr << "campaign aborted: service unreachable\n";
    return kExitRunFailure;
  }
  return kExitOk;
}

int cmd_replay(const std::string& suite_path, const std::string& manifest,
               const std::string& server, const std::string& out) {
  regula::TestSuite suite = regula::load_suite(suite_path);
  std::vector<regula::Verdict> verdicts;
  if (!server.empty()) {
    auto host_port = split_server(server);
    if (!host_port) throw regula::ConfigError("--server expects host:port");
    regula::HttpClient client(host_port->first, host_port->second);
    verdicts = regula::replay_suite(suite, client);
  } else {
    if (manifest.empty()) throw regula::ConfigError("replay needs --manifest or --server");
    regula::ApiCore core = regula::make_api_core(manifest);
    regula::InProcessClient client(core);
    verdicts = regula::replay_suite(suite, client);
  }
  nlohmann::json doc = nlohmann::json::array();
  size_t fails = 0, errors = 0;
  for (size_t i = 0; i < verdicts.size(); ++i) {
    const auto& v = verdicts[i];
    const char* kind = v.kind == regula::VerdictKind::Pass
                           ? "pass"
                           : v.kind == regula::VerdictKind::Fail ? "fail" : "error";
    if (v.kind == regula::VerdictKind::Fail) ++fails;
    if (v.kind == regula::VerdictKind::Error) ++errors;
    doc.push_back(nlohmann::json{{"test", i}, {"verdict", kind}, {"detail", v.detail}});
  }
  std::string text = doc.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    regula::write_text_file(out, text);
  std::cout << verdicts.size() << " tests, " << fails << " failing, " << errors << " errors\n";
  return fails || errors ? kExitRunFailure : kExitOk;
}

int cmd_mutants(const std::string& manifest, const std::string& version, const std::string& out) {
  regula::Manifest m = regula::load_manifest(manifest);
  regula::VariableRegistry registry = regula::load_registry(m);
  regula::RuleSetVersion rsv = regula::load_ruleset_version(m, version, registry);
  std::vector<regula::Mutant> mutants = regula::generate_mutants(rsv);
  std::string text = regula::mutants_to_json(mutants).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    regula::write_text_file(out, text);
  std::cerr << mutants.size() << " mutants\n";
  return kExitOk;
}

int cmd_muttest(const std::string& manifest, const std::string& version,
                const std::string& suite_path, const std::string& mutants_path,
                const std::string& report_out, const std::string& csv_out, int jobs) {
  regula::Manifest m = regula::load_manifest(manifest);
  regula::VariableRegistry registry = regula::load_registry(m);
  regula::RuleSetVersion rsv = regula::load_ruleset_version(m, version, registry);
  regula::TestSuite suite = regula::load_suite(suite_path);
  std::vector<regula::Mutant> mutants;
  if (mutants_path.empty())
    mutants = regula::generate_mutants(rsv);
  else
    mutants = regula::mutants_from_json(nlohmann::json::parse(regula::read_text_file(mutants_path)));
  regula::MutationRunConfig config;
  config.jobs = jobs;
  regula::MutationReport report =
      regula::run_mutation_testing(suite, rsv, mutants, registry, config);
  if (!report_out.empty())
    regula::write_text_file(report_out, regula::mutation_report_to_json(report).dump(2) + "\n");
  if (!csv_out.empty()) regula::write_text_file(csv_out, regula::mutation_report_to_csv(report));
  std::printf("MS %.6f (%zu/%zu)  MS_V %.6f  MS_A %.6f  killed-by-construction %zu\n", report.ms,
              report.killed, report.total, report.ms_validation, report.ms_aggregation,
              report.killed_by_construction);
  return kExitOk;
}

int cmd_experiment(const std::string& manifest, const std::string& out_dir,
                   const std::vector<std::string>& strategies,
                   const std::vector<std::string>& versions, const std::vector<std::string>& modes,
                   int repetitions, int budget, std::uint64_t seed, int jobs) {
  regula::ExperimentPlan plan;
  for (const auto& s : strategies) plan.strategies.push_back(parse_strategy(s));
  plan.versions = versions;
  for (const auto& m : modes) plan.modes.push_back(parse_mode(m));
  plan.repetitions = repetitions;
  plan.budget = budget;
  plan.master_seed = seed_or_env(seed);
  plan.jobs = jobs;
  regula::ExperimentOutcome outcome = regula::run_experiment(plan, manifest, out_dir);
  std::cout << "completed " << outcome.completed << " sub-runs";
  if (!outcome.failures.empty()) std::cout << ", " << outcome.failures.size() << " failed";
  std::cout << "\nreport: " << outcome.directory << "/report.csv\n";
  return outcome.failures.empty() ? kExitOk : kExitRunFailure;
}

int cmd_report(const std::string& experiment_dir, double alpha, const std::string& baseline) {
  regula::StatConfig config;
  config.alpha = alpha;
  regula::write_report(experiment_dir, config);
  std::cout << "wrote " << experiment_dir << "/report.csv and report.json\n";
  if (!baseline.empty()) {
    regula::write_baseline_comparison(experiment_dir, baseline);
    std::cout << "wrote " << experiment_dir << "/baseline-comparison.json\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regula - rule engine testing workbench"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (TOML/INI); flags override");

  std::string manifest = "data/manifest.json";
  std::string version = "s3";
  std::string mode = "strict";
  std::uint64_t seed = 1;
  int port = 0;
  std::string inject_path;
  std::string out;
  int count = 10;
  double absent_probability = 0.2;
  double invalid_probability = 0.2;
  std::string strategy = "EVOGURI";
  int budget = 1000;
  std::string suite_out, log_out, server, suite_path, mutants_path, report_out, csv_out;
  std::vector<std::string> strategies = {"RANDOM_BB", "EVOGURI", "MIO_LITE"};
  std::vector<std::string> versions = {"s1", "s2", "s3"};
  std::vector<std::string> modes = {"default", "strict"};
  int repetitions = 30;
  int jobs = 1;
  std::string experiment_dir;
  double alpha = 0.01;

  auto* serve = app.add_subcommand("serve", "Start the HTTP rule service");
  serve->add_option("--manifest", manifest, "Rule-set manifest path");
  serve->add_option("--port", port, "Port (0 = ephemeral)");
  serve->add_option("--seed", seed, "Service seed (fault injection stream)");
  serve->add_option("--inject", inject_path, "Fault-injection profile (JSON), disabled if absent");

  auto* schema = app.add_subcommand("schema", "Emit a schema document");
  schema->add_option("--manifest", manifest, "Rule-set manifest path");
  schema->add_option("--version", version, "Rule-set version");
  schema->add_option("--mode", mode, "default or strict");
  schema->add_option("--out", out, "Output file (stdout if omitted)");

  auto* sample = app.add_subcommand("sample", "Sample schema-driven records");
  sample->add_option("--manifest", manifest, "Rule-set manifest path");
  sample->add_option("--mode", mode, "default or strict");
  sample->add_option("--seed", seed, "Sampler seed");
  sample->add_option("--count", count, "Number of records");
  sample->add_option("--absent-probability", absent_probability, "Per-variable absence probability");
  sample->add_option("--invalid-probability", invalid_probability,
                     "Malformed-date probability (default mode)");

  auto* generate = app.add_subcommand("generate", "Run a test-generation campaign");
  generate->add_option("--manifest", manifest, "Rule-set manifest path");
  generate->add_option("--strategy", strategy, "RANDOM_BB, EVOGURI, or MIO_LITE");
  generate->add_option("--version", version, "Rule-set version");
  generate->add_option("--mode", mode, "default or strict");
  generate->add_option("--budget", budget, "Request budget");
  generate->add_option("--seed", seed, "Campaign seed");
  generate->add_option("--suite", suite_out, "Suite output path");
  generate->add_option("--log", log_out, "Campaign log output path (NDJSON)");
  generate->add_option("--server", server, "host:port of a running service (in-process if omitted)");

  auto* replay = app.add_subcommand("replay", "Replay a suite against the engine");
  replay->add_option("--suite", suite_path, "Suite path")->required();
  replay->add_option("--manifest", manifest, "Rule-set manifest path (in-process replay)");
  replay->add_option("--server", server, "host:port of a running service");
  replay->add_option("--out", out, "Verdicts output path (stdout if omitted)");

  auto* mutants = app.add_subcommand("mutants", "Enumerate single-site rule mutants");
  mutants->add_option("--manifest", manifest, "Rule-set manifest path");
  mutants->add_option("--version", version, "Rule-set version");
  mutants->add_option("--out", out, "Mutant corpus output path (stdout if omitted)");

  auto* muttest = app.add_subcommand("muttest", "Run mutation testing for a suite");
  muttest->add_option("--manifest", manifest, "Rule-set manifest path");
  muttest->add_option("--version", version, "Rule-set version");
  muttest->add_option("--suite", suite_path, "Suite path")->required();
  muttest->add_option("--mutants", mutants_path, "Mutant corpus (regenerated if omitted)");
  muttest->add_option("--report", report_out, "Report JSON output path");
  muttest->add_option("--csv", csv_out, "Per-operator CSV output path");
  muttest->add_option("--jobs", jobs, "Worker threads");

  auto* experiment = app.add_subcommand("experiment", "Run a full experiment plan");
  experiment->add_option("--manifest", manifest, "Rule-set manifest path");
  experiment->add_option("--out", experiment_dir, "Experiment output directory")->required();
  experiment->add_option("--strategies", strategies, "Strategies to compare");
  experiment->add_option("--versions", versions, "Rule-set versions");
  experiment->add_option("--modes", modes, "Schema modes");
  experiment->add_option("--repetitions", repetitions, "Repetitions");
  experiment->add_option("--budget", budget, "Request budget per campaign");
  experiment->add_option("--seed", seed, "Master seed (REGULA_SEED overrides)");
  experiment->add_option("--jobs", jobs, "Parallel sub-runs");

  std::string baseline_path;
  auto* report = app.add_subcommand("report", "Recompute report tables for an experiment");
  report->add_option("--experiment-dir", experiment_dir, "Experiment directory")->required();
  report->add_option("--alpha", alpha, "Significance level (0.01 or 0.05)");
  report->add_option("--baseline", baseline_path,
                     "Production baseline file for result-frequency comparison");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (serve->parsed()) return cmd_serve(manifest, port, seed, inject_path);
    if (schema->parsed()) return cmd_schema(manifest, version, mode, out);
    if (sample->parsed())
      return cmd_sample(manifest, mode, seed, count, absent_probability, invalid_probability);
    if (generate->parsed())
      return cmd_generate(manifest, strategy, version, mode, budget, seed, suite_out, log_out,
                          server);
    if (replay->parsed()) return cmd_replay(suite_path, manifest, server, out);
    if (mutants->parsed()) return cmd_mutants(manifest, version, out);
    if (muttest->parsed())
      return cmd_muttest(manifest, version, suite_path, mutants_path, report_out, csv_out, jobs);
    if (experiment->parsed())
      return cmd_experiment(manifest, experiment_dir, strategies, versions, modes, repetitions,
                            budget, seed, jobs);
    if (report->parsed()) return cmd_report(experiment_dir, alpha, baseline_path);
  } catch (const regula::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const regula::LoadError& e) {
    std::cerr << "load error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitConfigError;
}
