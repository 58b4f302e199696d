#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gridrl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent RL co-simulation for distribution-feeder voltage "
               "regulation"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string preset;
  std::string checkpoints;
  std::string run_a;
  std::string run_b;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  int threads = 1;

  auto add_scenario_flags = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", config, "Scenario JSON path");
    cmd->add_option("--preset", preset, "Built-in preset (desk-scale or paper-scale)")
        ->check(CLI::IsMember({"desk-scale", "paper-scale"}));
    cmd->add_option("--seed", seed, "Override the scenario seed");
    if (needs_out) {
      cmd->add_option("--out", out, "Output directory")->required();
    }
  };

  CLI::App* train = app.add_subcommand("train", "Train PPO agents");
  add_scenario_flags(train, true);
  train->add_flag("--resume", resume, "Resume from the latest checkpoint");
  train->add_option("--threads", threads, "Worker pool cap for agent updates")
      ->check(CLI::PositiveNumber);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Evaluate trained checkpoints");
  add_scenario_flags(evaluate, true);
  evaluate->add_option("--checkpoints", checkpoints, "Checkpoint directory")
      ->required();

  CLI::App* baseline =
      app.add_subcommand("baseline", "Run the rule-based baseline");
  add_scenario_flags(baseline, true);

  CLI::App* comparecmd = app.add_subcommand("compare", "Compare two runs");
  comparecmd->add_option("--candidate", run_a, "Candidate run directory")->required();
  comparecmd->add_option("--reference", run_b, "Reference run directory")->required();
  comparecmd->add_option("--out", out, "Output directory")->required();

  CLI::App* validate =
      app.add_subcommand("validate-config", "Validate a scenario document");
  add_scenario_flags(validate, false);

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) {
    return gridrl::cmd_train(config, out, seed, resume, threads, preset);
  }
  if (evaluate->parsed()) {
    return gridrl::cmd_evaluate(checkpoints, config, out, seed, preset);
  }
  if (baseline->parsed()) {
    return gridrl::cmd_baseline(config, out, seed, preset);
  }
  if (comparecmd->parsed()) {
    return gridrl::cmd_compare(run_a, run_b, out);
  }
  if (validate->parsed()) {
    return gridrl::cmd_validate_config(config, preset);
  }
  return 0;
}
