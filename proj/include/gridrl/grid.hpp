#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace gridrl {

enum class BusKind { slack, pq };

/// One network node. Voltage magnitude/angle are outputs of the last
/// converged solve; shunt_q is a fixed capacitor injection in MVAR.
struct Bus {
  int id = 0;
  BusKind kind = BusKind::pq;
  double base_kv = 12.66;
  double shunt_q_mvar = 0.0;
  double voltage_mag = 1.0;  // p.u.
  double voltage_ang = 0.0;  // rad
};

/// Series branch between two buses, impedance already in per-unit on the
/// network's system base.
struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double r_pu = 0.0;
  double x_pu = 0.0;
};

/// Distribution network with per-bus net injections (sign convention: load
/// negative, generation positive). The solver does not assume radiality even
/// though the embedded feeder is radial.
struct Network {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<double> p_mw;    // net real injection per bus
  std::vector<double> q_mvar;  // net reactive injection per bus
  double base_mva = 10.0;

  int slack_index() const;

  /// Checks the structural invariants: exactly one slack bus, injection
  /// arrays sized to the bus count, line endpoints distinct and known,
  /// x > 0, r >= 0, shunt_q >= 0, and a connected graph containing the
  /// slack. Throws ConfigError on violation.
  void validate() const;
};

struct PowerFlowResult {
  bool converged = false;
  int iterations = 0;
  double max_mismatch = 0.0;   // p.u. power
  std::vector<double> voltage_mag;
  std::vector<double> voltage_ang;
};

/// The standard 33-bus radial test feeder: 33 buses, 32 lines, bus 0 slack
/// at 12.66 kV, embedded branch impedances and nominal loads (3.715 MW,
/// 2.3 MVAR total), no shunts. Impedances are converted to per-unit on the
/// 12.66 kV / 10 MVA system base.
Network load_ieee33();

/// Full Newton-Raphson AC power flow in polar form with an analytically
/// assembled Jacobian. On convergence the bus voltage fields of `net` are
/// updated and the result carries magnitudes/angles for every bus; the slack
/// is held at 1.0 p.u., 0 rad. Throws NonConvergence if the mismatch does
/// not drop below `tol` within `max_iter` iterations - no partial result is
/// ever returned. `iterations` counts mismatch evaluations, so the flat
/// no-load case reports 1.
PowerFlowResult solve_power_flow(Network& net, double tol = 1e-8,
                                 int max_iter = 30);

/// Replaces the net injection at one bus. The slack bus accepts a value but
/// the solver ignores it (the slack absorbs the balance). Throws UnknownBus.
void set_bus_injection(Network& net, int bus, double p_mw, double q_mvar);

/// Seasonal capacitor-bank schedule for the 33-bus scenario. Winter: a
/// single 1.2 MVAR bank at bus 14. Summer: 1.8 MVAR at bus 14 (base bank
/// plus a 0.6 MVAR seasonal one), 0.6 MVAR at bus 24 and 1.2 MVAR at bus 30.
/// Bus numbers are internal 0-based indices; the call overwrites all shunts
/// so toggling is idempotent.
void set_seasonal_capacitors(Network& net, bool summer);

nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);
Network load_network_json(const std::string& path);
void save_network_json(const Network& net, const std::string& path);

}  // namespace gridrl
