#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gridrl {

enum class DeviceKind { hvac_tes, dhw_tes, battery };

/// One storage unit. Thermal devices (HVAC / DHW tanks) store and release
/// energy against an exogenous thermal demand; the battery stores electric
/// energy behind the PV inverter. All powers are on the storage side of the
/// efficiency: charging at p_max_kw draws p_max_kw / efficiency from the
/// meter.
struct StorageDevice {
  DeviceKind kind = DeviceKind::battery;
  double cap_max_kwh = 0.0;
  double soc_kwh = 0.0;
  double p_max_kw = 0.0;           // charge limit, > 0
  double p_min_kw = 0.0;           // discharge limit, < 0
  double efficiency = 1.0;         // (0, 1]
  double loss_kwh_per_step = 0.0;  // standby loss, >= 0
  double dt_hours = 0.25;

  bool thermal() const { return kind != DeviceKind::battery; }
};

struct ChargeResult {
  double electric_consumption_kw = 0.0;  // what the op returns
  double storage_power_kw = 0.0;         // signed, + charging
};

/// Storage dispatch for one step. `u` in [-1, 1] positions the power request
/// affinely as p_min + u * (p_max - p_min); the charging branch (u >= 0)
/// caps the request by free capacity and by p_max - request, the discharge
/// branch (u < 0) by the stored energy and p_min. Thermal demand is served
/// first regardless of u, and for thermal devices storage discharge is
/// additionally capped at the current demand (a tank cannot export). SOC is
/// reduced by the standby loss and clamped to [0, cap_max]; out-of-range
/// requests are silently truncated rather than rejected. Returns the
/// electric power drawn from the meter, floored at zero for thermal devices
/// (the battery may go negative, i.e. export).
ChargeResult charge(StorageDevice& dev, double u, double p_demand_kw);

/// Smart-inverter setpoint shared by the PV array and the battery.
struct InverterSetting {
  double curtailment = 0.0;    // [0, 1]
  double phase_lag_rad = 0.0;  // [-phi_max, phi_max]; + injects VARs
};

struct PQ {
  double p_kw = 0.0;
  double q_kvar = 0.0;
};

/// Per-step exogenous series for one building (or one replicated building
/// template): thermal demands, plug load, irradiance as a fraction of PV
/// rating, and outdoor temperature. One shared dt and length.
struct ProfileSet {
  double dt_hours = 0.25;
  std::vector<double> hvac_demand_kw;
  std::vector<double> dhw_demand_kw;
  std::vector<double> plug_load_kw;
  std::vector<double> irradiance;  // [0, 1]
  std::vector<double> outdoor_temp_c;

  std::size_t size() const { return hvac_demand_kw.size(); }
  void validate() const;  // throws UnitError / ShapeMismatch
};

enum class ControllerKind { rl, rbc };

struct Building {
  int id = 0;
  int bus = 0;
  std::optional<StorageDevice> hvac_tes;
  std::optional<StorageDevice> dhw_tes;
  std::optional<StorageDevice> battery;
  double pv_rated_kw = 0.0;
  double power_factor = 0.95;  // lagging, for non-inverter load
  ControllerKind controller = ControllerKind::rbc;
  double alpha = 20.0;  // reward weight
  std::shared_ptr<const ProfileSet> profiles;

  int device_count() const {
    return (hvac_tes ? 1 : 0) + (dhw_tes ? 1 : 0) + (battery ? 1 : 0);
  }
};

/// PV apparent power after curtailment, split by the inverter phase lag:
/// p = S cos(phi), q = S sin(phi). Positive phase lag injects reactive
/// power (capacitive support), negative absorbs it.
PQ pv_output(const Building& bld, std::size_t t, const InverterSetting& s);

/// Device-level dispatch inputs for one building and one step. Storage u
/// values are in charge() coordinates. The battery has no agent action slot;
/// when unset it receives the neutral request (storage power 0) and only
/// loses standby energy.
struct DeviceActions {
  std::optional<double> u_hvac;
  std::optional<double> u_dhw;
  std::optional<double> u_battery;
  InverterSetting inverter;
};

/// Advances every storage device one step and returns the building's net
/// electric injection in kW / kVAR, load negative. Real power is PV output
/// minus plug load and storage consumptions; reactive power is the inverter
/// injection minus the lagging load at the fixed 0.95 power factor. Battery
/// export shares the PV inverter, so a discharging battery is split by the
/// same (cos, sin) pair; battery charging draws real power through the
/// meter.
PQ net_injection(Building& bld, std::size_t t, const DeviceActions& actions);

/// u that makes the affine power request exactly zero for this device.
inline double neutral_u(const StorageDevice& dev) {
  return -dev.p_min_kw / (dev.p_max_kw - dev.p_min_kw);
}

}  // namespace gridrl
