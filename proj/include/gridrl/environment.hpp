#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridrl/building.hpp"
#include "gridrl/grid.hpp"
#include "gridrl/log.hpp"
#include "gridrl/scenario.hpp"

namespace gridrl {

constexpr int kObservationSize = 18;

/// Per-agent observation, every feature affinely normalized to [-1, 1]:
/// hour sin/cos, day-of-week, outdoor temp + 1-step forecast, irradiance +
/// 1-step forecast, hvac/dhw/plug demands, the three SOC fractions, local
/// bus voltage and its 1-step lag, net building P and Q, season flag.
using Observation = std::array<double, kObservationSize>;

/// Environment-level action vector in [-1, 1] per slot, ordered
/// [u_hvac, u_dhw, curtailment_raw, phase_raw]; slots for absent devices are
/// omitted. Storage slots map to charge() coordinates via u = (a + 1) / 2 so
/// a = 0 requests zero storage power on symmetric devices; curtailment =
/// (raw + 1) / 2 and phase_lag = raw * phi_max.
using ActionVec = std::vector<double>;

struct ActionSpec {
  bool has_hvac = false;
  bool has_dhw = false;
  bool has_inverter = false;
  int size() const { return (has_hvac ? 1 : 0) + (has_dhw ? 1 : 0) + (has_inverter ? 2 : 0); }
};

struct StepInfo {
  int power_flow_iterations = 0;
  int clipped_actions = 0;
  bool storage_zeroed_retry = false;  // first NonConvergence fallback taken
  bool aborted = false;               // second failure: episode terminated
};

struct StepResult {
  std::map<int, Observation> observations;  // per RL agent, keyed by building id
  std::map<int, double> rewards;
  std::vector<double> voltages;  // per bus, p.u.
  bool done = false;
  StepInfo info;
};

/// Everything an agent is allowed to observe: its own building's signals,
/// the clock and the voltage at its own bus. Observations are built from
/// this struct alone, which makes the privacy boundary structural.
struct LocalSignals {
  double hour_of_day = 0.0;
  int day_of_week = 0;
  bool summer = false;
  double outdoor_temp_c = 0.0;
  double outdoor_temp_next_c = 0.0;
  double irradiance = 0.0;
  double irradiance_next = 0.0;
  double hvac_demand_kw = 0.0;
  double dhw_demand_kw = 0.0;
  double plug_load_kw = 0.0;
  double soc_hvac_frac = 0.0;
  double soc_dhw_frac = 0.0;
  double soc_batt_frac = 0.0;
  double bus_voltage = 1.0;
  double bus_voltage_prev = 1.0;
  double net_p_kw = 0.0;
  double net_q_kvar = 0.0;
};

Observation make_observation(const LocalSignals& s,
                             const NormalizationRanges& n);

/// Voltage-deviation reward, maximum 1 at v = 1 and symmetric about it.
double reward(double voltage_pu, double alpha);

/// The multi-agent episodic co-simulation: buildings compute injections
/// from synchronously applied actions, injections aggregate onto buses, an
/// AC power flow resolves voltages and every agent is rewarded from its own
/// bus. Building-to-bus assignment, the RL subset and profile synthesis are
/// all deterministic functions of the scenario seed.
class Environment {
 public:
  explicit Environment(ScenarioConfig cfg);

  /// Re-initializes episode state (SOCs at 50%, t = 0, season capacitors,
  /// initial power flow) and returns the initial observations for RL agents.
  std::map<int, Observation> reset();

  /// Advances one step. `rl_actions` must hold exactly one action per RL
  /// agent. If the power flow fails to converge the step is retried once
  /// with every storage request zeroed; a second failure terminates the
  /// episode with the configured penalty reward for every agent.
  StepResult step(const std::map<int, ActionVec>& rl_actions);

  /// Rule-based schedule in env action coordinates: charge storage in the
  /// night window, discharge in the evening window, idle otherwise; no
  /// curtailment, no phase lag.
  ActionVec rbc_action(const Building& bld, std::size_t t) const;

  const ScenarioConfig& config() const { return cfg_; }
  const Network& network() const { return net_; }
  const std::vector<Building>& buildings() const { return buildings_; }
  std::vector<int> rl_agent_ids() const;
  ActionSpec action_spec(int building_id) const;
  std::size_t horizon_steps() const { return horizon_; }
  std::size_t current_step() const { return t_; }
  bool done() const { return done_; }

  /// Per-building data from the last step, for episode logging: action
  /// slots (4-wide), SOC slots (3-wide) and rewards for every building.
  const std::vector<std::array<double, 4>>& last_actions() const { return last_actions_; }
  const std::vector<std::array<double, 3>>& last_socs() const { return last_socs_; }
  const std::vector<double>& last_rewards_all() const { return last_rewards_all_; }
  const std::vector<PQ>& last_injections() const { return last_injections_; }
  const std::vector<double>& voltages() const { return voltages_; }
  Observation observation_for(int building_id) const;

  /// Mid-episode state for checkpointing: step counter, SOCs and voltage
  /// lags. Profiles and assignment rebuild deterministically from the seed.
  nlohmann::json save_state() const;
  void restore_state(const nlohmann::json& j);

 private:
  friend EpisodeLog run_episode(
      Environment& env,
      const std::function<ActionVec(int, const Observation&)>* policy);

  int day_of_year(std::size_t t) const;
  bool is_summer(std::size_t t) const;
  double hour_of_day(std::size_t t) const;
  LocalSignals local_signals(const Building& bld, std::size_t t) const;
  DeviceActions to_device_actions(const Building& bld, const ActionVec& a,
                                  bool zero_storage, int* clipped) const;
  void apply_injections(std::size_t t,
                        const std::vector<DeviceActions>& actions);
  void record_step(const std::vector<ActionVec>& env_actions);

  ScenarioConfig cfg_;
  Network net_;
  std::vector<Building> buildings_;
  std::vector<int> pq_buses_;
  std::size_t horizon_ = 0;
  std::size_t t_ = 0;
  bool done_ = false;
  std::vector<double> voltages_;
  std::vector<double> prev_voltages_;
  std::vector<PQ> last_injections_;  // per building, kW / kVAR
  std::vector<std::array<double, 4>> last_actions_;
  std::vector<std::array<double, 3>> last_socs_;
  std::vector<double> last_rewards_all_;
};

/// Full-horizon rollout. `policy` supplies deterministic actions for RL
/// agents (mean policy, for evaluation); pass nullptr for a baseline run in
/// which every building follows the rule-based schedule.
EpisodeLog run_episode(
    Environment& env,
    const std::function<ActionVec(int, const Observation&)>* policy);

}  // namespace gridrl
