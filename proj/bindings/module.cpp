#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridrl/environment.hpp"
#include "gridrl/errors.hpp"
#include "gridrl/grid.hpp"
#include "gridrl/metrics.hpp"
#include "gridrl/profiles.hpp"
#include "gridrl/scenario.hpp"

#include <nlohmann/json.hpp>

namespace py = pybind11;
using namespace gridrl;

namespace {

// The scenario surface crosses the boundary as JSON text; python callers
// build plain dicts and json.dumps them.
ScenarioConfig scenario_from_text(const std::string& text) {
  return scenario_from_json(nlohmann::json::parse(text));
}

EpisodeLog log_from_parts(double dt_hours, std::size_t buses,
                          std::size_t agents,
                          const std::vector<double>& voltages,
                          const std::vector<double>& actions,
                          const std::vector<double>& socs,
                          const std::vector<double>& rewards) {
  EpisodeLog log;
  log.dt_hours = dt_hours;
  log.num_buses = buses;
  log.num_agents = agents;
  log.num_steps = buses == 0 ? 0 : voltages.size() / buses;
  log.voltages = voltages;
  log.actions = actions;
  log.socs = socs;
  log.rewards = rewards;
  log.validate();
  return log;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-agent RL co-simulation of buildings on a distribution "
            "feeder: AC power flow, storage dispatch, smart inverters, "
            "voltage-deviation rewards and evaluation metrics.";

  py::register_exception<NonConvergence>(m, "NonConvergenceError");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<UnknownBus>(m, "UnknownBusError");

  py::enum_<BusKind>(m, "BusKind")
      .value("slack", BusKind::slack)
      .value("pq", BusKind::pq);

  py::class_<Bus>(m, "Bus")
      .def_readonly("id", &Bus::id)
      .def_readonly("kind", &Bus::kind)
      .def_readonly("base_kv", &Bus::base_kv)
      .def_readwrite("shunt_q_mvar", &Bus::shunt_q_mvar)
      .def_readonly("voltage_mag", &Bus::voltage_mag)
      .def_readonly("voltage_ang", &Bus::voltage_ang);

  py::class_<Network>(m, "Network")
      .def_readonly("buses", &Network::buses)
      .def_readonly("p_mw", &Network::p_mw)
      .def_readonly("q_mvar", &Network::q_mvar)
      .def_readonly("base_mva", &Network::base_mva)
      .def("to_json", [](const Network& n) { return network_to_json(n).dump(); });

  py::class_<PowerFlowResult>(m, "PowerFlowResult")
      .def_readonly("converged", &PowerFlowResult::converged)
      .def_readonly("iterations", &PowerFlowResult::iterations)
      .def_readonly("max_mismatch", &PowerFlowResult::max_mismatch)
      .def_readonly("voltage_mag", &PowerFlowResult::voltage_mag)
      .def_readonly("voltage_ang", &PowerFlowResult::voltage_ang);

  m.def("load_ieee33", &load_ieee33, "The embedded 33-bus radial feeder");
  m.def("network_from_json",
        [](const std::string& text) {
          return network_from_json(nlohmann::json::parse(text));
        });
  m.def("solve_power_flow", &solve_power_flow, py::arg("net"),
        py::arg("tol") = 1e-8, py::arg("max_iter") = 30);
  m.def("set_bus_injection", &set_bus_injection, py::arg("net"),
        py::arg("bus"), py::arg("p_mw"), py::arg("q_mvar"));
  m.def("set_seasonal_capacitors", &set_seasonal_capacitors, py::arg("net"),
        py::arg("summer"));

  py::class_<StorageDevice>(m, "StorageDevice")
      .def(py::init([](const std::string& kind, double cap, double soc,
                       double p_max, double p_min, double eta, double loss,
                       double dt) {
             StorageDevice d;
             if (kind == "hvac_tes") d.kind = DeviceKind::hvac_tes;
             else if (kind == "dhw_tes") d.kind = DeviceKind::dhw_tes;
             else if (kind == "battery") d.kind = DeviceKind::battery;
             else throw ConfigError("unknown device kind '" + kind + "'");
             d.cap_max_kwh = cap;
             d.soc_kwh = soc;
             d.p_max_kw = p_max;
             d.p_min_kw = p_min;
             d.efficiency = eta;
             d.loss_kwh_per_step = loss;
             d.dt_hours = dt;
             return d;
           }),
           py::arg("kind"), py::arg("cap_max_kwh"), py::arg("soc_kwh"),
           py::arg("p_max_kw"), py::arg("p_min_kw"), py::arg("efficiency") = 1.0,
           py::arg("loss_kwh_per_step") = 0.0, py::arg("dt_hours") = 0.25)
      .def_readwrite("soc_kwh", &StorageDevice::soc_kwh)
      .def_readonly("cap_max_kwh", &StorageDevice::cap_max_kwh);

  m.def(
      "charge",
      [](StorageDevice& dev, double u, double p_demand) {
        const ChargeResult r = charge(dev, u, p_demand);
        return py::make_tuple(r.electric_consumption_kw, r.storage_power_kw);
      },
      py::arg("device"), py::arg("u"), py::arg("p_demand_kw"),
      "Storage dispatch for one step; returns (electric_consumption_kw, "
      "storage_power_kw) and advances the device SOC");

  m.def("reward", &reward, py::arg("voltage_pu"), py::arg("alpha"),
        "Voltage-deviation reward, 1 - (alpha * (v - 1))^2");

  m.def(
      "synthesize_profiles",
      [](std::uint64_t seed, int days, double dt_hours, const std::string& use) {
        SynthOptions options;
        options.use = use_type_from_string(use);
        const ProfileSet p = synthesize_profiles(seed, days, dt_hours, options);
        py::dict out;
        out["dt_hours"] = p.dt_hours;
        out["hvac_demand_kw"] = p.hvac_demand_kw;
        out["dhw_demand_kw"] = p.dhw_demand_kw;
        out["plug_load_kw"] = p.plug_load_kw;
        out["irradiance"] = p.irradiance;
        out["outdoor_temp_c"] = p.outdoor_temp_c;
        return out;
      },
      py::arg("seed"), py::arg("days"), py::arg("dt_hours"),
      py::arg("use") = "residential");

  m.def("desk_scale_scenario",
        []() { return scenario_to_json(desk_scale_preset()).dump(); });
  m.def("paper_scale_scenario",
        []() { return scenario_to_json(paper_scale_preset()).dump(); });

  py::class_<StepInfo>(m, "StepInfo")
      .def_readonly("power_flow_iterations", &StepInfo::power_flow_iterations)
      .def_readonly("clipped_actions", &StepInfo::clipped_actions)
      .def_readonly("storage_zeroed_retry", &StepInfo::storage_zeroed_retry)
      .def_readonly("aborted", &StepInfo::aborted);

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("observations", &StepResult::observations)
      .def_readonly("rewards", &StepResult::rewards)
      .def_readonly("voltages", &StepResult::voltages)
      .def_readonly("done", &StepResult::done)
      .def_readonly("info", &StepResult::info);

  py::class_<Environment>(m, "Environment")
      .def(py::init([](const std::string& scenario_json) {
             return new Environment(scenario_from_text(scenario_json));
           }),
           py::arg("scenario_json"))
      .def("reset", &Environment::reset)
      .def("step", &Environment::step, py::arg("actions"))
      .def("rl_agent_ids", &Environment::rl_agent_ids)
      .def("action_size",
           [](const Environment& env, int id) { return env.action_spec(id).size(); })
      .def("horizon_steps", &Environment::horizon_steps)
      .def("current_step", &Environment::current_step)
      .def("done", &Environment::done)
      .def("voltages", &Environment::voltages)
      .def("num_buildings",
           [](const Environment& env) { return env.buildings().size(); })
      .def("rbc_action",
           [](const Environment& env, int id, std::size_t t) {
             return env.rbc_action(env.buildings().at(static_cast<std::size_t>(id)), t);
           })
      .def("run_baseline_episode", [](Environment& env) {
        const EpisodeLog log = run_episode(env, nullptr);
        py::dict out;
        out["dt_hours"] = log.dt_hours;
        out["steps"] = log.num_steps;
        out["buses"] = log.num_buses;
        out["agents"] = log.num_agents;
        out["voltages"] = log.voltages;
        out["actions"] = log.actions;
        out["socs"] = log.socs;
        out["rewards"] = log.rewards;
        return out;
      });

  py::class_<ViolationReport>(m, "ViolationReport")
      .def_readonly("over_1_04", &ViolationReport::over_104)
      .def_readonly("over_1_03", &ViolationReport::over_103)
      .def_readonly("under_0_97", &ViolationReport::under_097)
      .def_readonly("under_0_96", &ViolationReport::under_096);

  m.def(
      "violation_counts",
      [](double dt, std::size_t buses, const std::vector<double>& voltages) {
        EpisodeLog log = log_from_parts(dt, buses, 0, voltages, {}, {}, {});
        return violation_counts(log);
      },
      py::arg("dt_hours"), py::arg("num_buses"), py::arg("voltages"));
  m.def(
      "deviation_norm_series",
      [](double dt, std::size_t buses, const std::vector<double>& voltages,
         std::size_t window) {
        EpisodeLog log = log_from_parts(dt, buses, 0, voltages, {}, {}, {});
        return deviation_norm_series(log, window);
      },
      py::arg("dt_hours"), py::arg("num_buses"), py::arg("voltages"),
      py::arg("window") = 1);
  m.def("percent_reduction", &percent_reduction, py::arg("base"), py::arg("other"));
  m.def("truncate_one_decimal", &truncate_one_decimal, py::arg("value"));

#ifdef GRIDRL_VERSION
  m.attr("__version__") = GRIDRL_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
