// secperc: command-line front end for the secrecy-graph experiments.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "secperc/config.hpp"
#include "secperc/errors.hpp"
#include "secperc/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kRuntime = 3, kIo = 4 };

int report(const char* kind, const std::string& message, int code, const std::string& field = {}) {
  nlohmann::json err = {{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}};
  if (!field.empty()) err["error"]["field"] = field;
  std::cerr << err.dump() << "\n";
  return code;
}

struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  unsigned workers = 0;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "config file, or inline JSON text")->required();
  cmd->add_option("--seed", f.seed, "master seed (overrides config)");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials (overrides config)");
  cmd->add_option("--workers", f.workers, "worker threads (overrides config)");
  cmd->add_option("--out", f.out, "output directory (overrides config)");
}

}  // namespace

int main(int argc, char** argv) {
  using secperc::experiment::Subcommand;

  CLI::App app{"Monte Carlo and closed-form experiments on secrecy graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", secperc::experiment::kToolVersion);

  CommonFlags flags;
  secperc::experiment::Request req;
  bool strict = false;

  auto* bounds = app.add_subcommand("bounds", "critical-intensity bounds and covering constants");
  auto* estimate = app.add_subcommand("estimate", "estimate one event probability");
  auto* sweep = app.add_subcommand("sweep", "estimate an event over a list of parameter values");
  auto* lambda_c = app.add_subcommand("lambda-c", "critical ratio lambda/lambda_e by bisection");
  auto* graph = app.add_subcommand("graph", "sample one secrecy graph and dump it");
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  for (auto* cmd : {bounds, estimate, sweep, lambda_c, graph, verify}) add_common(cmd, flags);

  const std::vector<std::string> events{"B", "Ac", "Gc", "Q", "rho2", "DeDl", "DeltaGamma", "span"};
  estimate->add_option("--event", req.event, "event to estimate")
      ->required()
      ->check(CLI::IsMember(events));
  sweep->add_option("--event", req.event, "event to estimate")->check(CLI::IsMember(events));
  sweep->add_option("--param", req.sweep_param, "swept parameter")
      ->check(CLI::IsMember({"lambda", "lambda_e", "r", "beta", "n1"}));
  sweep->add_option("--values", req.sweep_values, "parameter values")->required()->delimiter(',');
  verify->add_option("--suite", req.suite, "suite name")
      ->required()
      ->check(CLI::IsMember({"closed-forms", "invariants", "recursion"}));
  verify->add_flag("--strict", strict, "exit with status 3 when any check fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), kValidation);
  }

  if (*bounds) req.subcommand = Subcommand::bounds;
  else if (*estimate) req.subcommand = Subcommand::estimate;
  else if (*sweep) req.subcommand = Subcommand::sweep;
  else if (*lambda_c) req.subcommand = Subcommand::lambda_c;
  else if (*graph) req.subcommand = Subcommand::graph;
  else req.subcommand = Subcommand::verify;

  try {
    secperc::config::ExperimentConfig cfg = secperc::config::parse_config(flags.config);
    CLI::App* cmd = app.get_subcommands().front();
    if (cmd->count("--seed")) cfg.seed = flags.seed;
    if (cmd->count("--trials")) cfg.trials = flags.trials;
    if (cmd->count("--workers")) cfg.workers = flags.workers;
    if (cmd->count("--out")) cfg.output_dir = flags.out;
    secperc::config::validate(cfg);

    secperc::experiment::RunOutput run;
    const auto manifest = secperc::experiment::run_experiment(cfg, req, &run);
    nlohmann::json summary = {{"directory", manifest.directory.string()}, {"results", run.results}};
    std::cout << summary.dump(2) << "\n";
    if (strict && !run.all_passed) return report("verification", "some checks failed", kRuntime);
    return kOk;
  } catch (const secperc::ValidationError& e) {
    return report("validation", e.what(), kValidation, e.field());
  } catch (const secperc::IoError& e) {
    return report("io", e.what(), kIo);
  } catch (const secperc::BracketError& e) {
    return report("bracket", e.what(), kRuntime);
  } catch (const secperc::ParameterError& e) {
    return report("parameter", e.what(), kRuntime);
  } catch (const std::exception& e) {
    return report("runtime", e.what(), kRuntime);
  }
}
