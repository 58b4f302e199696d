#include "gridrl/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "gridrl/environment.hpp"
#include "gridrl/errors.hpp"
#include "gridrl/metrics.hpp"
#include "gridrl/scenario.hpp"
#include "gridrl/train.hpp"

#ifndef GRIDRL_VERSION
#define GRIDRL_VERSION "0.1.0"
#endif

namespace gridrl {

namespace fs = std::filesystem;

namespace {

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

struct ManifestWriter {
  std::string out_dir;
  std::string scenario_path;
  std::uint64_t seed = 0;
  std::uint64_t hash = 0;
  std::string started_at = timestamp_utc();
  std::vector<std::string> outputs;

  void add(const std::string& relative) { outputs.push_back(relative); }
  void add(const std::vector<std::string>& relative) {
    outputs.insert(outputs.end(), relative.begin(), relative.end());
  }

  void write() {
    add("manifest.json");
    nlohmann::json j;
    j["version"] = GRIDRL_VERSION;
    j["config_hash"] = hash;
    j["seed"] = seed;
    j["scenario"] = scenario_path;
    j["started_at"] = started_at;
    j["finished_at"] = timestamp_utc();
    j["outputs"] = outputs;
    std::ofstream out(fs::path(out_dir) / "manifest.json");
    out << j.dump(2) << '\n';
  }
};

ScenarioConfig load_config(const std::string& config_path,
                           const std::string& preset,
                           std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg;
  if (!config_path.empty()) {
    cfg = load_scenario(config_path);
  } else if (preset == "desk-scale") {
    cfg = desk_scale_preset();
  } else if (preset == "paper-scale") {
    cfg = paper_scale_preset();
  } else {
    throw ConfigError("either --config or --preset is required");
  }
  if (!preset.empty() && !config_path.empty() && cfg.preset != preset) {
    throw ConfigError("--preset disagrees with the config's preset field");
  }
  if (seed) cfg.seed = *seed;
  return cfg;
}

void write_run_outputs(const EpisodeLog& log, const std::string& out_dir,
                       ManifestWriter& manifest) {
  manifest.add(write_episode_csv(log, out_dir));
  const ViolationReport violations = violation_counts(log);
  {
    std::ofstream out(fs::path(out_dir) / "violations.json");
    out << violations_to_json(violations).dump(2) << '\n';
    manifest.add("violations.json");
  }
  const std::size_t day_steps =
      static_cast<std::size_t>(std::lround(24.0 / log.dt_hours));
  write_series_csv(log, day_steps, (fs::path(out_dir) / "series.csv").string());
  manifest.add("series.csv");
}

}  // namespace

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, bool resume, int threads,
              const std::string& preset) {
  ScenarioConfig cfg;
  try {
    cfg = load_config(config_path, preset, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigInvalid;
  }
  try {
    fs::create_directories(out_dir);
    Environment env(cfg);
    ManifestWriter manifest{out_dir, config_path, cfg.seed, config_hash(cfg)};
    {
      std::ofstream scenario_out(fs::path(out_dir) / "scenario.json");
      scenario_out << scenario_to_json(cfg).dump(2) << '\n';
      manifest.add("scenario.json");
    }
    TrainOptions opt{out_dir, resume, threads};
    const TrainSummary summary = train(env, cfg.ppo, opt);
    manifest.add(summary.outputs);
    manifest.write();
    std::cout << "trained " << summary.env_steps << " env steps, "
              << summary.updates << " updates per agent\n";
    return kExitOk;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    return kExitTrainingAborted;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigInvalid;
  }
}

int cmd_evaluate(const std::string& checkpoint_dir,
                 const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, const std::string& preset) {
  ScenarioConfig cfg;
  try {
    cfg = load_config(config_path, preset, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigInvalid;
  }
  try {
    Environment env(cfg);
    // Roster check: every RL agent needs a checkpoint with a matching
    // action dimension. Profile or scenario swaps are allowed (that is the
    // transfer mechanism), parameter-shape mismatches are not.
    std::map<int, PolicyState> policies;
    for (int id : env.rl_agent_ids()) {
      PolicyState ps = load_agent_checkpoint(checkpoint_dir, id);
      if (ps.act_dim() != env.action_spec(id).size() ||
          ps.obs_dim() != kObservationSize) {
        throw ShapeMismatch("checkpoint for agent " + std::to_string(id) +
                            " has incompatible dimensions");
      }
      policies.emplace(id, std::move(ps));
    }
    fs::create_directories(out_dir);
    ManifestWriter manifest{out_dir, config_path, cfg.seed, config_hash(cfg)};

    RandomStream unused(0);
    std::function<ActionVec(int, const Observation&)> policy =
        [&](int id, const Observation& obs) {
          Eigen::VectorXd x(kObservationSize);
          for (int i = 0; i < kObservationSize; ++i) x(i) = obs[static_cast<std::size_t>(i)];
          const ActionSample s =
              policies.at(id).sample_action(x, true, unused);
          ActionVec a(s.action.size());
          for (Eigen::Index i = 0; i < s.action.size(); ++i) a[i] = s.action(i);
          return a;
        };
    const EpisodeLog log = run_episode(env, &policy);
    write_run_outputs(log, out_dir, manifest);
    manifest.write();
    return kExitOk;
  } catch (const ShapeMismatch& e) {
    std::cerr << "checkpoint mismatch: " << e.what() << '\n';
    return kExitCheckpointMismatch;
  } catch (const ConfigError& e) {
    std::cerr << "checkpoint/scenario error: " << e.what() << '\n';
    return kExitCheckpointMismatch;
  }
}

int cmd_baseline(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, const std::string& preset) {
  ScenarioConfig cfg;
  try {
    cfg = load_config(config_path, preset, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigInvalid;
  }
  try {
    Environment env(cfg);
    fs::create_directories(out_dir);
    ManifestWriter manifest{out_dir, config_path, cfg.seed, config_hash(cfg)};
    const EpisodeLog log = run_episode(env, nullptr);
    write_run_outputs(log, out_dir, manifest);
    manifest.write();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return kExitConfigInvalid;
  }
}

int cmd_compare(const std::string& run_candidate,
                const std::string& run_reference, const std::string& out_dir) {
  try {
    const EpisodeLog candidate = read_episode_csv(run_candidate);
    const EpisodeLog reference = read_episode_csv(run_reference);
    const ComparisonReport report = compare(candidate, reference);
    fs::create_directories(out_dir);
    ManifestWriter manifest{out_dir, run_candidate + " vs " + run_reference, 0, 0};
    {
      std::ofstream out(fs::path(out_dir) / "comparison.json");
      out << comparison_to_json(report).dump(2) << '\n';
      manifest.add("comparison.json");
    }
    const std::string table = format_comparison_table(report);
    {
      std::ofstream out(fs::path(out_dir) / "comparison.txt");
      out << table;
      manifest.add("comparison.txt");
    }
    manifest.write();
    std::cout << table;
    return kExitOk;
  } catch (const ShapeMismatch& e) {
    std::cerr << "shape mismatch: " << e.what() << '\n';
    return kExitShapeMismatch;
  } catch (const std::exception& e) {
    std::cerr << "cannot compare runs: " << e.what() << '\n';
    return kExitShapeMismatch;
  }
}

int cmd_validate_config(const std::string& config_path,
                        const std::string& preset) {
  try {
    const ScenarioConfig cfg = load_config(config_path, preset, std::nullopt);
    Network net = cfg.network == "ieee33" ? load_ieee33()
                                          : load_network_json(cfg.network);
    net.validate();
    cfg.validate(static_cast<int>(net.buses.size()) - 1);
    std::cout << scenario_to_json(cfg).dump(2) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigInvalid;
  }
}

}  // namespace gridrl
