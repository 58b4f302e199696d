#include "gridrl/train.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>

#include <nlohmann/json.hpp>

#include "gridrl/errors.hpp"
#include "gridrl/scenario.hpp"

namespace gridrl {

namespace fs = std::filesystem;

namespace {

Eigen::VectorXd to_vector(const Observation& obs) {
  Eigen::VectorXd v(kObservationSize);
  for (int i = 0; i < kObservationSize; ++i) v(i) = obs[static_cast<std::size_t>(i)];
  return v;
}

std::string curves_csv_text(const std::vector<CurveRow>& curves) {
  std::string text =
      "update,agent,mean_reward,policy_loss,value_loss,clip_fraction,"
      "approx_kl,mean_ratio\n";
  char buf[256];
  for (const CurveRow& r : curves) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  r.update, r.agent, r.mean_reward, r.policy_loss, r.value_loss,
                  r.clip_fraction, r.approx_kl, r.mean_ratio);
    text += buf;
  }
  return text;
}

struct AgentState {
  int id = 0;
  PolicyState policy;
  RolloutBuffer buffer;
  RandomStream sample_rng{0};
  RandomStream shuffle_rng{0};
  Eigen::VectorXd obs;
  Eigen::VectorXd pending_presquash;
  double pending_log_prob = 0.0;
  double pending_value = 0.0;
};

}  // namespace

TrainSummary train(Environment& env, const PPOConfig& cfg,
                   const TrainOptions& opt) {
  const std::vector<int> agent_ids = env.rl_agent_ids();
  if (agent_ids.empty()) {
    throw ConfigError("training requires at least one RL agent (rl_fraction > 0)");
  }
  const fs::path out_dir(opt.out_dir);
  const fs::path ckpt_dir = out_dir / "checkpoints";
  fs::create_directories(ckpt_dir);

  // Resume-compatibility hash: the step budget is a stopping condition, not
  // part of the dynamics, so extending it and resuming is legal.
  ScenarioConfig compat = env.config();
  compat.ppo.total_steps = 0;
  const std::uint64_t scenario_hash = config_hash(compat);
  RandomStream master(env.config().seed);

  std::vector<AgentState> agents;
  agents.reserve(agent_ids.size());
  for (int id : agent_ids) {
    AgentState a;
    a.id = id;
    RandomStream init = master.substream("policy-init:" + std::to_string(id));
    a.policy = PolicyState(kObservationSize, env.action_spec(id).size(), cfg, init);
    a.buffer = RolloutBuffer(cfg.steps_per_update);
    a.sample_rng = master.substream("sample:" + std::to_string(id));
    a.shuffle_rng = master.substream("shuffle:" + std::to_string(id));
    agents.push_back(std::move(a));
  }

  TrainSummary summary;
  std::map<int, Observation> observations = env.reset();

  if (opt.resume && fs::exists(ckpt_dir / "state.json")) {
    nlohmann::json state;
    std::ifstream in(ckpt_dir / "state.json");
    in >> state;
    if (state.at("config_hash").get<std::uint64_t>() != scenario_hash) {
      throw ConfigError("checkpoint was written for a different scenario");
    }
    summary.env_steps = state.at("env_steps").get<long long>();
    summary.updates = state.at("updates").get<int>();
    for (const auto& jr : state.at("curves")) {
      summary.curves.push_back({jr.at("update").get<int>(), jr.at("agent").get<int>(),
                                jr.at("mean_reward").get<double>(),
                                jr.at("policy_loss").get<double>(),
                                jr.at("value_loss").get<double>(),
                                jr.at("clip_fraction").get<double>(),
                                jr.at("approx_kl").get<double>(),
                                jr.at("mean_ratio").get<double>()});
    }
    env.restore_state(state.at("env"));
    for (AgentState& a : agents) {
      const fs::path file = ckpt_dir / ("agent_" + std::to_string(a.id) + ".json");
      std::ifstream ain(file);
      if (!ain) throw ConfigError("missing checkpoint " + file.string());
      nlohmann::json ja;
      ain >> ja;
      a.policy = PolicyState::from_json(ja.at("policy"));
      a.sample_rng.restore_state(ja.at("sample_rng").get<std::string>());
      a.shuffle_rng.restore_state(ja.at("shuffle_rng").get<std::string>());
    }
    observations.clear();
    if (!env.done()) {
      for (int id : agent_ids) observations[id] = env.observation_for(id);
    }
  }

  auto write_checkpoint = [&]() {
    for (AgentState& a : agents) {
      nlohmann::json ja;
      ja["agent"] = a.id;
      ja["config_hash"] = scenario_hash;
      ja["obs_dim"] = kObservationSize;
      ja["act_dim"] = env.action_spec(a.id).size();
      ja["policy"] = a.policy.to_json();
      ja["sample_rng"] = a.sample_rng.save_state();
      ja["shuffle_rng"] = a.shuffle_rng.save_state();
      std::ofstream out(ckpt_dir / ("agent_" + std::to_string(a.id) + ".json"));
      out << ja.dump() << '\n';
    }
    nlohmann::json state;
    state["config_hash"] = scenario_hash;
    state["env_steps"] = summary.env_steps;
    state["updates"] = summary.updates;
    state["env"] = env.save_state();
    nlohmann::json curves = nlohmann::json::array();
    for (const CurveRow& r : summary.curves) {
      curves.push_back({{"update", r.update},
                        {"agent", r.agent},
                        {"mean_reward", r.mean_reward},
                        {"policy_loss", r.policy_loss},
                        {"value_loss", r.value_loss},
                        {"clip_fraction", r.clip_fraction},
                        {"approx_kl", r.approx_kl},
                        {"mean_ratio", r.mean_ratio}});
    }
    state["curves"] = curves;
    std::ofstream out(ckpt_dir / "state.json");
    out << state.dump() << '\n';
    std::ofstream curves_out(out_dir / "curves.csv");
    curves_out << curves_csv_text(summary.curves);
  };

  while (summary.env_steps < cfg.total_steps) {
    if (env.done()) {
      observations = env.reset();
    }

    // Sample every agent against the same observations (synchronous
    // selection), then apply all actions in one environment step.
    std::map<int, ActionVec> actions;
    for (AgentState& a : agents) {
      a.obs = to_vector(observations.at(a.id));
      const ActionSample sample = a.policy.sample_action(a.obs, false, a.sample_rng);
      a.pending_presquash = sample.presquash;
      a.pending_log_prob = sample.log_prob;
      a.pending_value = a.policy.value(a.obs);
      ActionVec act(sample.action.size());
      for (Eigen::Index i = 0; i < sample.action.size(); ++i) act[i] = sample.action(i);
      actions[a.id] = std::move(act);
    }

    const StepResult result = env.step(actions);
    ++summary.env_steps;
    observations = result.observations;

    for (AgentState& a : agents) {
      a.buffer.push(a.obs, a.pending_presquash, a.pending_log_prob,
                    result.rewards.at(a.id), a.pending_value, result.done);
    }

    if (agents.front().buffer.full()) {
      ++summary.updates;
      auto update_agent = [&](AgentState& a) {
        double bootstrap = 0.0;
        if (!result.done) {
          bootstrap = a.policy.value(to_vector(observations.at(a.id)));
        }
        const UpdateStats stats =
            ppo_update(a.policy, a.buffer, cfg, a.shuffle_rng, bootstrap);
        return CurveRow{summary.updates, a.id,          stats.mean_reward,
                        stats.policy_loss, stats.value_loss, stats.clip_fraction,
                        stats.approx_kl,   stats.mean_ratio};
      };

      std::vector<CurveRow> rows(agents.size());
      if (opt.threads > 1) {
        std::vector<std::future<void>> futures;
        const std::size_t stride =
            (agents.size() + static_cast<std::size_t>(opt.threads) - 1) /
            static_cast<std::size_t>(opt.threads);
        for (std::size_t begin = 0; begin < agents.size(); begin += stride) {
          const std::size_t end = std::min(begin + stride, agents.size());
          futures.push_back(std::async(std::launch::async, [&, begin, end]() {
            for (std::size_t i = begin; i < end; ++i) rows[i] = update_agent(agents[i]);
          }));
        }
        for (auto& f : futures) f.get();
      } else {
        for (std::size_t i = 0; i < agents.size(); ++i) rows[i] = update_agent(agents[i]);
      }
      summary.curves.insert(summary.curves.end(), rows.begin(), rows.end());

      if (summary.updates % cfg.checkpoint_every_updates == 0 ||
          summary.env_steps >= cfg.total_steps) {
        write_checkpoint();
      }
    }
  }

  write_checkpoint();
  summary.outputs.push_back("curves.csv");
  summary.outputs.push_back("checkpoints/state.json");
  for (int id : agent_ids) {
    summary.outputs.push_back("checkpoints/agent_" + std::to_string(id) + ".json");
  }
  return summary;
}

PolicyState load_agent_checkpoint(const std::string& checkpoint_dir,
                                  int agent_id) {
  const fs::path file =
      fs::path(checkpoint_dir) / ("agent_" + std::to_string(agent_id) + ".json");
  std::ifstream in(file);
  if (!in) throw ConfigError("missing checkpoint for agent " +
                             std::to_string(agent_id) + " at " + file.string());
  nlohmann::json j;
  in >> j;
  return PolicyState::from_json(j.at("policy"));
}

}  // namespace gridrl
