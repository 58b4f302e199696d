#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridrl/environment.hpp"
#include "gridrl/ppo.hpp"

namespace gridrl {

struct TrainOptions {
  std::string out_dir;
  bool resume = false;
  int threads = 1;
};

struct CurveRow {
  int update = 0;
  int agent = 0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double mean_ratio = 1.0;
};

struct TrainSummary {
  long long env_steps = 0;
  int updates = 0;
  std::vector<CurveRow> curves;
  std::vector<std::string> outputs;  // files written under out_dir
};

/// Independent-learner training loop: one PolicyState, rollout buffer and
/// sampling stream per RL agent, no parameter sharing. Rollouts interact
/// with the single environment serially; when the buffers fill (every
/// steps_per_update environment steps) each agent updates from its own data,
/// optionally in parallel. Checkpoints land after each update round, when
/// buffers are empty, so a resume restores parameters, optimizer moments,
/// RNG streams and mid-episode environment state exactly.
TrainSummary train(Environment& env, const PPOConfig& cfg,
                   const TrainOptions& opt);

/// Loads one agent's checkpointed policy; throws ConfigError if absent.
PolicyState load_agent_checkpoint(const std::string& checkpoint_dir,
                                  int agent_id);

}  // namespace gridrl
