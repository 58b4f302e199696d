#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridrl/ppo.hpp"
#include "gridrl/profiles.hpp"

namespace gridrl {

struct DeviceSizing {
  double cap_kwh = 0.0;
  double p_kw = 0.0;  // symmetric limits: charge +p_kw, discharge -p_kw
  double efficiency = 1.0;
};

/// One portfolio entry: `count` buildings sharing a use type, device
/// sizing, PV rating and one replicated profile series.
struct BuildingTemplate {
  std::string name;
  BuildingUseType use = BuildingUseType::residential;
  int count = 0;
  double pv_rated_kw = 0.0;
  std::optional<DeviceSizing> hvac_tes;
  std::optional<DeviceSizing> dhw_tes;
  std::optional<DeviceSizing> battery;
  SynthOptions profile;
};

/// Fixed affine maps used to squash observation features into [-1, 1];
/// fixed (rather than running statistics) so evaluation is reproducible.
struct NormalizationRanges {
  double temp_lo_c = -5.0, temp_hi_c = 45.0;
  double hvac_hi_kw = 60.0;
  double dhw_hi_kw = 30.0;
  double plug_hi_kw = 60.0;
  double voltage_lo = 0.90, voltage_hi = 1.10;
  double net_p_lo_kw = -250.0, net_p_hi_kw = 250.0;
  double net_q_lo_kvar = -120.0, net_q_hi_kvar = 120.0;
};

struct RbcSchedule {
  int charge_begin_hour = 22;  // wraps past midnight
  int charge_end_hour = 7;
  int discharge_begin_hour = 15;
  int discharge_end_hour = 21;
  double magnitude = 0.34;
};

struct PowerFlowSettings {
  double tol = 1e-8;
  int max_iter = 30;
};

/// Everything needed to build the co-simulation: network source, portfolio,
/// control split, time base, season window and the seeded RNG fan-out.
struct ScenarioConfig {
  std::string preset;              // "", "desk-scale" or "paper-scale"
  std::string network = "ieee33";  // builtin name or a network JSON path
  int buildings_per_bus = 6;       // per non-slack bus
  double rl_fraction = 0.5;
  double dt_hours = 0.25;
  int episode_days = 8;
  int start_day_of_year = 172;
  int start_day_of_week = 0;
  int summer_begin_day = 152;  // day-of-year, inclusive
  int summer_end_day = 244;
  std::uint64_t seed = 1;
  double alpha = 20.0;
  double penalty_reward = -10.0;
  double min_power_factor = 0.8;  // inverter limit -> phi_max = acos(pf)
  double load_power_factor = 0.95;
  double standby_loss_per_hour_frac = 0.002;  // of cap_max, scaled by dt
  std::string profiles_csv;  // when set, replaces synthesis for all entries
  std::vector<BuildingTemplate> portfolio;
  NormalizationRanges normalization;
  RbcSchedule rbc;
  PowerFlowSettings power_flow;
  PPOConfig ppo;

  int total_buildings() const;
  double max_phase_lag() const;
  /// Throws ConfigError when fields are out of range or the portfolio does
  /// not cover buildings_per_bus x (buses - 1) buildings.
  void validate(int non_slack_buses) const;
};

ScenarioConfig desk_scale_preset();
ScenarioConfig paper_scale_preset();

/// Parses a scenario JSON document. A "preset" field loads that preset
/// first; any other field present then overrides it.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::string& path);

/// Stable FNV-1a hash of the canonical serialized config; recorded in run
/// manifests and checkpoints so mismatched resumes are detectable.
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace gridrl
