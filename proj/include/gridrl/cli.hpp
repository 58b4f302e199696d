#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gridrl {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigInvalid = 2;
inline constexpr int kExitTrainingAborted = 3;
inline constexpr int kExitCheckpointMismatch = 4;
inline constexpr int kExitShapeMismatch = 5;

/// Runs ppo training on the scenario, writing checkpoints, the training
/// curve CSV and a run manifest under out_dir. Resume picks up from the
/// latest checkpoint and reproduces the uninterrupted run exactly.
int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, bool resume, int threads,
              const std::string& preset = "");

/// Deterministic-policy evaluation of trained checkpoints on a scenario;
/// writes episode CSVs, the violation report and plot-ready series.
int cmd_evaluate(const std::string& checkpoint_dir,
                 const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed,
                 const std::string& preset = "");

/// Rule-based run over the full horizon (100% RBC penetration); same
/// outputs as evaluate.
int cmd_baseline(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed,
                 const std::string& preset = "");

/// Compares two finished runs (candidate first, reference second) and emits
/// the violation-count table as text and JSON.
int cmd_compare(const std::string& run_candidate,
                const std::string& run_reference, const std::string& out_dir);

/// Parses and validates a scenario document; prints the normalized form.
int cmd_validate_config(const std::string& config_path,
                        const std::string& preset = "");

}  // namespace gridrl
