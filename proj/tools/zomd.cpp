#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zomd/cli/commands.hpp"

namespace {

void AddCommonFlags(CLI::App* cmd, zomd::cli::CommandOptions& options, std::string& config, std::string& out) {
  cmd->add_option("--config", config, "Experiment config (JSON)")->required();
  cmd->add_option("--seed", options.seed, "Master seed; overrides run.master_seed");
  cmd->add_option("--out", out, "Output directory; overrides output.directory");
  cmd->add_option("--trials", options.trials, "Number of seeded trials; overrides run.trials");
  cmd->add_flag("--quiet", options.quiet, "Suppress console output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order mirror descent under a biased noise oracle"};
  app.require_subcommand(1);

  zomd::cli::CommandOptions options;
  std::string config;
  std::string out;

  CLI::App* run = app.add_subcommand("run", "Run the configured experiment and write trajectories and a summary");
  CLI::App* bounds = app.add_subcommand("bounds", "Compute the theoretical constants and bound reports");
  CLI::App* verify = app.add_subcommand("verify-estimator", "Check the estimator bounds over a mu grid");
  CLI::App* sweep = app.add_subcommand("sweep", "One ensemble per smoothing radius");
  for (CLI::App* cmd : {run, bounds, verify, sweep}) AddCommonFlags(cmd, options, config, out);

  std::string parameter = "mu";
  std::vector<std::string> values;
  sweep->add_option("--param", parameter, "Swept parameter (mu)");
  sweep->add_option("--values", values, "Values to sweep, comma or space separated; 'mu_star' selects the optimal radius")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return zomd::cli::kExitConfig;
  }

  options.config = config;
  if (!out.empty()) options.out = out;

  if (run->parsed()) return zomd::cli::cmd_run(options, std::cout, std::cerr);
  if (bounds->parsed()) return zomd::cli::cmd_bounds(options, std::cout, std::cerr);
  if (verify->parsed()) return zomd::cli::cmd_verify_estimator(options, std::cout, std::cerr);
  return zomd::cli::cmd_sweep(options, parameter, values, std::cout, std::cerr);
}
