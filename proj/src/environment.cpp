#include "gridrl/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gridrl/errors.hpp"
#include "gridrl/rng.hpp"

namespace gridrl {

namespace {

constexpr double kPi = 3.14159265358979323846;

double affine(double x, double lo, double hi) {
  const double clamped = std::clamp(x, lo, hi);
  return 2.0 * (clamped - lo) / (hi - lo) - 1.0;
}

StorageDevice make_device(DeviceKind kind, const DeviceSizing& sizing,
                          double dt_hours, double standby_frac_per_hour) {
  StorageDevice dev;
  dev.kind = kind;
  dev.cap_max_kwh = sizing.cap_kwh;
  dev.soc_kwh = 0.5 * sizing.cap_kwh;
  dev.p_max_kw = sizing.p_kw;
  dev.p_min_kw = -sizing.p_kw;
  dev.efficiency = sizing.efficiency;
  dev.loss_kwh_per_step = standby_frac_per_hour * sizing.cap_kwh * dt_hours;
  dev.dt_hours = dt_hours;
  return dev;
}

}  // namespace

double reward(double voltage_pu, double alpha) {
  const double dev = alpha * (voltage_pu - 1.0);
  return 1.0 - dev * dev;
}

Observation make_observation(const LocalSignals& s,
                             const NormalizationRanges& n) {
  Observation obs{};
  const double hour_angle = 2.0 * kPi * s.hour_of_day / 24.0;
  obs[0] = std::sin(hour_angle);
  obs[1] = std::cos(hour_angle);
  obs[2] = affine(static_cast<double>(s.day_of_week), 0.0, 6.0);
  obs[3] = affine(s.outdoor_temp_c, n.temp_lo_c, n.temp_hi_c);
  obs[4] = affine(s.outdoor_temp_next_c, n.temp_lo_c, n.temp_hi_c);
  obs[5] = affine(s.irradiance, 0.0, 1.0);
  obs[6] = affine(s.irradiance_next, 0.0, 1.0);
  obs[7] = affine(s.hvac_demand_kw, 0.0, n.hvac_hi_kw);
  obs[8] = affine(s.dhw_demand_kw, 0.0, n.dhw_hi_kw);
  obs[9] = affine(s.plug_load_kw, 0.0, n.plug_hi_kw);
  obs[10] = affine(s.soc_hvac_frac, 0.0, 1.0);
  obs[11] = affine(s.soc_dhw_frac, 0.0, 1.0);
  obs[12] = affine(s.soc_batt_frac, 0.0, 1.0);
  obs[13] = affine(s.bus_voltage, n.voltage_lo, n.voltage_hi);
  obs[14] = affine(s.bus_voltage_prev, n.voltage_lo, n.voltage_hi);
  obs[15] = affine(s.net_p_kw, n.net_p_lo_kw, n.net_p_hi_kw);
  obs[16] = affine(s.net_q_kvar, n.net_q_lo_kvar, n.net_q_hi_kvar);
  obs[17] = s.summer ? 1.0 : -1.0;
  return obs;
}

Environment::Environment(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
  net_ = cfg_.network == "ieee33" ? load_ieee33()
                                  : load_network_json(cfg_.network);
  net_.validate();
  const int slack = net_.slack_index();
  for (int i = 0; i < static_cast<int>(net_.buses.size()); ++i) {
    if (i != slack) pq_buses_.push_back(i);
  }
  cfg_.validate(static_cast<int>(pq_buses_.size()));

  horizon_ = static_cast<std::size_t>(
      std::lround(cfg_.episode_days * 24.0 / cfg_.dt_hours));

  RandomStream master(cfg_.seed);

  // One replicated profile series per portfolio template; a CSV source, when
  // configured, replaces synthesis for every template.
  const int profile_days = cfg_.episode_days;
  std::vector<std::shared_ptr<const ProfileSet>> template_profiles;
  for (const BuildingTemplate& t : cfg_.portfolio) {
    std::shared_ptr<const ProfileSet> prof;
    if (!cfg_.profiles_csv.empty()) {
      prof = std::make_shared<const ProfileSet>(
          load_profiles_csv(cfg_.profiles_csv, cfg_.dt_hours, cfg_.seed));
    } else {
      SynthOptions options = t.profile;
      options.use = t.use;
      options.start_day_of_year = cfg_.start_day_of_year;
      prof = std::make_shared<const ProfileSet>(synthesize_profiles(
          master.substream("profiles:" + t.name).seed(), profile_days,
          cfg_.dt_hours, options));
    }
    if (prof->size() < horizon_) {
      throw ConfigError("profile series for template '" + t.name +
                        "' is shorter than the episode horizon");
    }
    template_profiles.push_back(std::move(prof));
  }

  // Instantiate the portfolio, then randomly place buildings_per_bus of them
  // on every distribution bus and pick the RL subset, both from seeded
  // substreams.
  for (std::size_t ti = 0; ti < cfg_.portfolio.size(); ++ti) {
    const BuildingTemplate& t = cfg_.portfolio[ti];
    for (int k = 0; k < t.count; ++k) {
      Building b;
      b.id = static_cast<int>(buildings_.size());
      b.pv_rated_kw = t.pv_rated_kw;
      b.power_factor = cfg_.load_power_factor;
      b.alpha = cfg_.alpha;
      b.profiles = template_profiles[ti];
      if (t.hvac_tes) {
        b.hvac_tes = make_device(DeviceKind::hvac_tes, *t.hvac_tes,
                                 cfg_.dt_hours, cfg_.standby_loss_per_hour_frac);
      }
      if (t.dhw_tes) {
        b.dhw_tes = make_device(DeviceKind::dhw_tes, *t.dhw_tes, cfg_.dt_hours,
                                cfg_.standby_loss_per_hour_frac);
      }
      if (t.battery) {
        b.battery = make_device(DeviceKind::battery, *t.battery, cfg_.dt_hours,
                                cfg_.standby_loss_per_hour_frac);
      }
      buildings_.push_back(std::move(b));
    }
  }

  std::vector<int> order(buildings_.size());
  std::iota(order.begin(), order.end(), 0);
  RandomStream assign_rng = master.substream("assignment");
  assign_rng.shuffle(order);
  for (std::size_t i = 0; i < order.size(); ++i) {
    buildings_[order[i]].bus = pq_buses_[i / cfg_.buildings_per_bus];
  }

  std::vector<int> rl_order(buildings_.size());
  std::iota(rl_order.begin(), rl_order.end(), 0);
  RandomStream rl_rng = master.substream("rl-subset");
  rl_rng.shuffle(rl_order);
  const int rl_count = static_cast<int>(
      std::lround(cfg_.rl_fraction * static_cast<double>(buildings_.size())));
  for (int i = 0; i < static_cast<int>(buildings_.size()); ++i) {
    buildings_[rl_order[i]].controller =
        i < rl_count ? ControllerKind::rl : ControllerKind::rbc;
  }

  last_injections_.resize(buildings_.size());
  last_actions_.resize(buildings_.size());
  last_socs_.resize(buildings_.size());
  last_rewards_all_.resize(buildings_.size());
  reset();
}

std::vector<int> Environment::rl_agent_ids() const {
  std::vector<int> ids;
  for (const Building& b : buildings_) {
    if (b.controller == ControllerKind::rl) ids.push_back(b.id);
  }
  return ids;
}

ActionSpec Environment::action_spec(int building_id) const {
  const Building& b = buildings_.at(static_cast<std::size_t>(building_id));
  return {b.hvac_tes.has_value(), b.dhw_tes.has_value(), b.pv_rated_kw > 0.0};
}

int Environment::day_of_year(std::size_t t) const {
  const int day_index =
      static_cast<int>(static_cast<double>(t) * cfg_.dt_hours / 24.0);
  return (cfg_.start_day_of_year + day_index) % 365;
}

bool Environment::is_summer(std::size_t t) const {
  const int doy = day_of_year(t);
  return doy >= cfg_.summer_begin_day && doy <= cfg_.summer_end_day;
}

double Environment::hour_of_day(std::size_t t) const {
  return std::fmod(static_cast<double>(t) * cfg_.dt_hours, 24.0);
}

LocalSignals Environment::local_signals(const Building& bld,
                                        std::size_t t) const {
  const ProfileSet& prof = *bld.profiles;
  const std::size_t t_now = std::min(t, prof.size() - 1);
  const std::size_t t_next = std::min(t + 1, prof.size() - 1);
  LocalSignals s;
  s.hour_of_day = hour_of_day(t);
  const int day_index =
      static_cast<int>(static_cast<double>(t) * cfg_.dt_hours / 24.0);
  s.day_of_week = (cfg_.start_day_of_week + day_index) % 7;
  s.summer = is_summer(t);
  s.outdoor_temp_c = prof.outdoor_temp_c[t_now];
  s.outdoor_temp_next_c = prof.outdoor_temp_c[t_next];
  s.irradiance = prof.irradiance[t_now];
  s.irradiance_next = prof.irradiance[t_next];
  s.hvac_demand_kw = prof.hvac_demand_kw[t_now];
  s.dhw_demand_kw = prof.dhw_demand_kw[t_now];
  s.plug_load_kw = prof.plug_load_kw[t_now];
  if (bld.hvac_tes) s.soc_hvac_frac = bld.hvac_tes->soc_kwh / bld.hvac_tes->cap_max_kwh;
  if (bld.dhw_tes) s.soc_dhw_frac = bld.dhw_tes->soc_kwh / bld.dhw_tes->cap_max_kwh;
  if (bld.battery) s.soc_batt_frac = bld.battery->soc_kwh / bld.battery->cap_max_kwh;
  s.bus_voltage = voltages_[static_cast<std::size_t>(bld.bus)];
  s.bus_voltage_prev = prev_voltages_[static_cast<std::size_t>(bld.bus)];
  s.net_p_kw = last_injections_[static_cast<std::size_t>(bld.id)].p_kw;
  s.net_q_kvar = last_injections_[static_cast<std::size_t>(bld.id)].q_kvar;
  return s;
}

Observation Environment::observation_for(int building_id) const {
  return make_observation(
      local_signals(buildings_.at(static_cast<std::size_t>(building_id)), t_),
      cfg_.normalization);
}

ActionVec Environment::rbc_action(const Building& bld, std::size_t t) const {
  const double hour = hour_of_day(t);
  const RbcSchedule& sched = cfg_.rbc;
  auto in_window = [&](int begin, int end) {
    if (begin <= end) return hour >= begin && hour < end;
    return hour >= begin || hour < end;  // wraps past midnight
  };
  double u = 0.0;
  if (in_window(sched.charge_begin_hour, sched.charge_end_hour)) {
    u = sched.magnitude;
  } else if (in_window(sched.discharge_begin_hour, sched.discharge_end_hour)) {
    u = -sched.magnitude;
  }
  const ActionSpec spec = action_spec(bld.id);
  ActionVec a;
  if (spec.has_hvac) a.push_back(u);
  if (spec.has_dhw) a.push_back(u);
  if (spec.has_inverter) {
    a.push_back(-1.0);  // curtailment 0
    a.push_back(0.0);   // phase lag 0
  }
  return a;
}

DeviceActions Environment::to_device_actions(const Building& bld,
                                             const ActionVec& a,
                                             bool zero_storage,
                                             int* clipped) const {
  const ActionSpec spec = action_spec(bld.id);
  if (static_cast<int>(a.size()) != spec.size()) {
    throw ConfigError("building " + std::to_string(bld.id) + " expects " +
                      std::to_string(spec.size()) + " action values, got " +
                      std::to_string(a.size()));
  }
  auto clamp_unit = [&](double x) {
    if (x < -1.0 || x > 1.0) {
      if (clipped != nullptr) ++*clipped;
      return std::clamp(x, -1.0, 1.0);
    }
    return x;
  };
  DeviceActions out;
  std::size_t slot = 0;
  if (spec.has_hvac) {
    const double raw = clamp_unit(a[slot++]);
    out.u_hvac = zero_storage ? neutral_u(*bld.hvac_tes) : (raw + 1.0) / 2.0;
  }
  if (spec.has_dhw) {
    const double raw = clamp_unit(a[slot++]);
    out.u_dhw = zero_storage ? neutral_u(*bld.dhw_tes) : (raw + 1.0) / 2.0;
  }
  if (spec.has_inverter) {
    const double curt_raw = clamp_unit(a[slot++]);
    const double phase_raw = clamp_unit(a[slot++]);
    out.inverter.curtailment = (curt_raw + 1.0) / 2.0;
    out.inverter.phase_lag_rad = phase_raw * cfg_.max_phase_lag();
  }
  return out;
}

void Environment::apply_injections(std::size_t t,
                                   const std::vector<DeviceActions>& actions) {
  std::fill(net_.p_mw.begin(), net_.p_mw.end(), 0.0);
  std::fill(net_.q_mvar.begin(), net_.q_mvar.end(), 0.0);
  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    Building& bld = buildings_[i];
    const PQ pq = net_injection(bld, t, actions[i]);
    last_injections_[i] = pq;
    net_.p_mw[static_cast<std::size_t>(bld.bus)] += pq.p_kw / 1000.0;
    net_.q_mvar[static_cast<std::size_t>(bld.bus)] += pq.q_kvar / 1000.0;
  }
}

std::map<int, Observation> Environment::reset() {
  t_ = 0;
  done_ = false;
  for (Building& b : buildings_) {
    if (b.hvac_tes) b.hvac_tes->soc_kwh = 0.5 * b.hvac_tes->cap_max_kwh;
    if (b.dhw_tes) b.dhw_tes->soc_kwh = 0.5 * b.dhw_tes->cap_max_kwh;
    if (b.battery) b.battery->soc_kwh = 0.5 * b.battery->cap_max_kwh;
  }
  set_seasonal_capacitors(net_, is_summer(0));

  // Initial power flow from an idle preview (neutral storage, no
  // curtailment, no phase lag) computed on device copies so SOCs are
  // untouched until the first step commits.
  std::vector<Building> preview = buildings_;
  std::fill(net_.p_mw.begin(), net_.p_mw.end(), 0.0);
  std::fill(net_.q_mvar.begin(), net_.q_mvar.end(), 0.0);
  for (std::size_t i = 0; i < preview.size(); ++i) {
    const PQ pq = net_injection(preview[i], 0, DeviceActions{});
    last_injections_[i] = pq;
    net_.p_mw[static_cast<std::size_t>(preview[i].bus)] += pq.p_kw / 1000.0;
    net_.q_mvar[static_cast<std::size_t>(preview[i].bus)] += pq.q_kvar / 1000.0;
  }
  const PowerFlowResult pf =
      solve_power_flow(net_, cfg_.power_flow.tol, cfg_.power_flow.max_iter);
  voltages_ = pf.voltage_mag;
  prev_voltages_ = pf.voltage_mag;

  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    last_actions_[i] = {0.0, 0.0, 0.0, 0.0};
    last_socs_[i] = {buildings_[i].hvac_tes ? buildings_[i].hvac_tes->soc_kwh : 0.0,
                     buildings_[i].dhw_tes ? buildings_[i].dhw_tes->soc_kwh : 0.0,
                     buildings_[i].battery ? buildings_[i].battery->soc_kwh : 0.0};
    last_rewards_all_[i] =
        reward(voltages_[static_cast<std::size_t>(buildings_[i].bus)],
               buildings_[i].alpha);
  }

  std::map<int, Observation> observations;
  for (const Building& b : buildings_) {
    if (b.controller == ControllerKind::rl) {
      observations[b.id] = make_observation(local_signals(b, 0), cfg_.normalization);
    }
  }
  return observations;
}

void Environment::record_step(const std::vector<ActionVec>& env_actions) {
  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    const Building& b = buildings_[i];
    const ActionSpec spec = action_spec(b.id);
    std::array<double, 4> slots{0.0, 0.0, 0.0, 0.0};
    std::size_t src = 0;
    if (spec.has_hvac) slots[0] = env_actions[i][src++];
    if (spec.has_dhw) slots[1] = env_actions[i][src++];
    if (spec.has_inverter) {
      slots[2] = env_actions[i][src++];
      slots[3] = env_actions[i][src++];
    }
    last_actions_[i] = slots;
    last_socs_[i] = {b.hvac_tes ? b.hvac_tes->soc_kwh : 0.0,
                     b.dhw_tes ? b.dhw_tes->soc_kwh : 0.0,
                     b.battery ? b.battery->soc_kwh : 0.0};
  }
}

StepResult Environment::step(const std::map<int, ActionVec>& rl_actions) {
  if (done_ || t_ >= horizon_) {
    throw ConfigError("step() called past the episode horizon");
  }
  const std::vector<int> rl_ids = rl_agent_ids();
  if (rl_actions.size() != rl_ids.size()) {
    throw ConfigError("expected " + std::to_string(rl_ids.size()) +
                      " agent actions, got " + std::to_string(rl_actions.size()));
  }

  StepResult result;

  // (1)-(2) rule-based and learned actions, all selected against time t.
  std::vector<ActionVec> env_actions(buildings_.size());
  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    const Building& b = buildings_[i];
    if (b.controller == ControllerKind::rl) {
      const auto it = rl_actions.find(b.id);
      if (it == rl_actions.end()) {
        throw ConfigError("missing action for agent " + std::to_string(b.id));
      }
      env_actions[i] = it->second;
    } else {
      env_actions[i] = rbc_action(b, t_);
    }
  }

  std::vector<DeviceActions> device_actions(buildings_.size());
  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    device_actions[i] = to_device_actions(buildings_[i], env_actions[i], false,
                                          &result.info.clipped_actions);
  }

  // Snapshot SOCs so a failed solve can roll the dispatch back.
  std::vector<std::array<double, 3>> soc_snapshot(buildings_.size());
  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    soc_snapshot[i] = {buildings_[i].hvac_tes ? buildings_[i].hvac_tes->soc_kwh : 0.0,
                       buildings_[i].dhw_tes ? buildings_[i].dhw_tes->soc_kwh : 0.0,
                       buildings_[i].battery ? buildings_[i].battery->soc_kwh : 0.0};
  }
  auto restore_socs = [&]() {
    for (std::size_t i = 0; i < buildings_.size(); ++i) {
      if (buildings_[i].hvac_tes) buildings_[i].hvac_tes->soc_kwh = soc_snapshot[i][0];
      if (buildings_[i].dhw_tes) buildings_[i].dhw_tes->soc_kwh = soc_snapshot[i][1];
      if (buildings_[i].battery) buildings_[i].battery->soc_kwh = soc_snapshot[i][2];
    }
  };

  // (3)-(5) aggregate injections, seasonal capacitors, power flow.
  set_seasonal_capacitors(net_, is_summer(t_));
  apply_injections(t_, device_actions);

  bool solved = false;
  PowerFlowResult pf;
  try {
    pf = solve_power_flow(net_, cfg_.power_flow.tol, cfg_.power_flow.max_iter);
    solved = true;
  } catch (const NonConvergence&) {
    // Retry once with every storage request zeroed.
    restore_socs();
    result.info.storage_zeroed_retry = true;
    for (std::size_t i = 0; i < buildings_.size(); ++i) {
      device_actions[i] =
          to_device_actions(buildings_[i], env_actions[i], true, nullptr);
    }
    apply_injections(t_, device_actions);
    try {
      pf = solve_power_flow(net_, cfg_.power_flow.tol, cfg_.power_flow.max_iter);
      solved = true;
    } catch (const NonConvergence&) {
      solved = false;
    }
  }

  record_step(env_actions);

  if (!solved) {
    // Terminate with the penalty reward; voltages keep their last solved
    // values so the log never contains fabricated data.
    result.info.aborted = true;
    done_ = true;
    result.done = true;
    result.voltages = voltages_;
    for (std::size_t i = 0; i < buildings_.size(); ++i) {
      last_rewards_all_[i] = cfg_.penalty_reward;
    }
    for (int id : rl_ids) {
      result.rewards[id] = cfg_.penalty_reward;
      result.observations[id] = observation_for(id);
    }
    return result;
  }

  result.info.power_flow_iterations = pf.iterations;
  prev_voltages_ = voltages_;
  voltages_ = pf.voltage_mag;

  // (6) per-agent rewards at the building's own bus.
  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    last_rewards_all_[i] =
        reward(voltages_[static_cast<std::size_t>(buildings_[i].bus)],
               buildings_[i].alpha);
  }

  // (7) advance time; observations are for the new step.
  ++t_;
  done_ = t_ >= horizon_;
  result.done = done_;
  result.voltages = voltages_;
  for (const Building& b : buildings_) {
    if (b.controller == ControllerKind::rl) {
      result.rewards[b.id] = last_rewards_all_[static_cast<std::size_t>(b.id)];
      result.observations[b.id] =
          make_observation(local_signals(b, t_), cfg_.normalization);
    }
  }
  return result;
}

nlohmann::json Environment::save_state() const {
  nlohmann::json j;
  j["t"] = t_;
  j["done"] = done_;
  j["voltages"] = voltages_;
  j["prev_voltages"] = prev_voltages_;
  nlohmann::json socs = nlohmann::json::array();
  nlohmann::json injections = nlohmann::json::array();
  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    const Building& b = buildings_[i];
    socs.push_back({b.hvac_tes ? b.hvac_tes->soc_kwh : 0.0,
                    b.dhw_tes ? b.dhw_tes->soc_kwh : 0.0,
                    b.battery ? b.battery->soc_kwh : 0.0});
    injections.push_back({last_injections_[i].p_kw, last_injections_[i].q_kvar});
  }
  j["socs"] = socs;
  j["injections"] = injections;
  return j;
}

void Environment::restore_state(const nlohmann::json& j) {
  t_ = j.at("t").get<std::size_t>();
  done_ = j.at("done").get<bool>();
  voltages_ = j.at("voltages").get<std::vector<double>>();
  prev_voltages_ = j.at("prev_voltages").get<std::vector<double>>();
  const auto& socs = j.at("socs");
  const auto& injections = j.at("injections");
  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    Building& b = buildings_[i];
    if (b.hvac_tes) b.hvac_tes->soc_kwh = socs[i][0].get<double>();
    if (b.dhw_tes) b.dhw_tes->soc_kwh = socs[i][1].get<double>();
    if (b.battery) b.battery->soc_kwh = socs[i][2].get<double>();
    last_injections_[i] = {injections[i][0].get<double>(),
                           injections[i][1].get<double>()};
  }
  set_seasonal_capacitors(net_, is_summer(t_));
}

EpisodeLog run_episode(
    Environment& env,
    const std::function<ActionVec(int, const Observation&)>* policy) {
  std::map<int, Observation> obs = env.reset();
  const std::vector<int> rl_ids = env.rl_agent_ids();
  if (policy == nullptr && !rl_ids.empty()) {
    // Baseline semantics: every building runs the rule-based schedule.
    std::map<int, ActionVec> actions;
    EpisodeLog log;
    log.dt_hours = env.config().dt_hours;
    log.num_buses = env.network().buses.size();
    log.num_agents = env.buildings().size();
    while (!env.done()) {
      for (int id : rl_ids) {
        actions[id] = env.rbc_action(
            env.buildings()[static_cast<std::size_t>(id)], env.current_step());
      }
      const StepResult r = env.step(actions);
      ++log.num_steps;
      log.voltages.insert(log.voltages.end(), r.voltages.begin(), r.voltages.end());
      for (std::size_t i = 0; i < env.buildings().size(); ++i) {
        const auto& a = env.last_actions()[i];
        log.actions.insert(log.actions.end(), a.begin(), a.end());
        const auto& s = env.last_socs()[i];
        log.socs.insert(log.socs.end(), s.begin(), s.end());
        log.rewards.push_back(env.last_rewards_all()[i]);
      }
    }
    log.validate();
    return log;
  }

  EpisodeLog log;
  log.dt_hours = env.config().dt_hours;
  log.num_buses = env.network().buses.size();
  log.num_agents = env.buildings().size();
  while (!env.done()) {
    std::map<int, ActionVec> actions;
    for (int id : rl_ids) {
      actions[id] = (*policy)(id, obs.at(id));
    }
    const StepResult r = env.step(actions);
    obs = r.observations;
    ++log.num_steps;
    log.voltages.insert(log.voltages.end(), r.voltages.begin(), r.voltages.end());
    for (std::size_t i = 0; i < env.buildings().size(); ++i) {
      const auto& a = env.last_actions()[i];
      log.actions.insert(log.actions.end(), a.begin(), a.end());
      const auto& s = env.last_socs()[i];
      log.socs.insert(log.socs.end(), s.begin(), s.end());
      log.rewards.push_back(env.last_rewards_all()[i]);
    }
  }
  log.validate();
  return log;
}

}  // namespace gridrl
