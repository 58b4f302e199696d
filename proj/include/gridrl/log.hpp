#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gridrl {

/// Flat record of one episode: per-step bus voltages plus per-building
/// actions, SOCs and rewards. "agent" rows cover every building (RBC ones
/// included) so that rule-based and learned runs can be compared like for
/// like. Action slots are fixed [hvac, dhw, curtailment, phase]; SOC slots
/// [hvac, dhw, battery]; absent devices log 0.
struct EpisodeLog {
  static constexpr std::size_t kActionSlots = 4;
  static constexpr std::size_t kSocSlots = 3;

  double dt_hours = 0.25;
  std::size_t num_steps = 0;
  std::size_t num_buses = 0;
  std::size_t num_agents = 0;
  std::vector<double> voltages;  // step-major, num_steps x num_buses
  std::vector<double> actions;   // num_steps x num_agents x 4
  std::vector<double> socs;      // num_steps x num_agents x 3
  std::vector<double> rewards;   // num_steps x num_agents

  double voltage(std::size_t step, std::size_t bus) const {
    return voltages[step * num_buses + bus];
  }
  double action(std::size_t step, std::size_t agent, std::size_t slot) const {
    return actions[(step * num_agents + agent) * kActionSlots + slot];
  }
  double soc(std::size_t step, std::size_t agent, std::size_t slot) const {
    return socs[(step * num_agents + agent) * kSocSlots + slot];
  }
  double reward(std::size_t step, std::size_t agent) const {
    return rewards[step * num_agents + agent];
  }

  void validate() const;  // shared step dimension, positive voltages
};

/// Writes voltages.csv (step,bus,voltage_pu), agents.csv (step, agent, the
/// four action slots, the three SOC slots, reward) and episode_meta.json
/// into `dir`; returns the relative paths written.
std::vector<std::string> write_episode_csv(const EpisodeLog& log,
                                           const std::string& dir);

/// Reads a log previously written by write_episode_csv.
EpisodeLog read_episode_csv(const std::string& dir);

}  // namespace gridrl
