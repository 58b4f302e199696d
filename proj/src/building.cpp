#include "gridrl/building.hpp"

#include <algorithm>
#include <cmath>

#include "gridrl/errors.hpp"

namespace gridrl {

void ProfileSet::validate() const {
  const std::size_t n = hvac_demand_kw.size();
  if (dhw_demand_kw.size() != n || plug_load_kw.size() != n ||
      irradiance.size() != n || outdoor_temp_c.size() != n) {
    throw ShapeMismatch("profile series must share one length");
  }
  if (dt_hours <= 0.0) throw UnitError("profile dt must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (hvac_demand_kw[i] < 0.0 || dhw_demand_kw[i] < 0.0 ||
        plug_load_kw[i] < 0.0) {
      throw UnitError("demand series must be non-negative (step " +
                      std::to_string(i) + ")");
    }
    if (irradiance[i] < 0.0 || irradiance[i] > 1.0) {
      throw UnitError("irradiance factor must lie in [0, 1] (step " +
                      std::to_string(i) + ")");
    }
  }
}

ChargeResult charge(StorageDevice& dev, double u, double p_demand_kw) {
  // Written in the same eta^-1 / dt^-1 form as the dispatch pseudocode so
  // the independent transcription oracle agrees to the last bit.
  const double inv_eta = 1.0 / dev.efficiency;
  const double inv_dt = 1.0 / dev.dt_hours;
  const double demand_cons = inv_eta * p_demand_kw;
  const double p_request =
      dev.p_min_kw + u * (dev.p_max_kw - dev.p_min_kw);

  double p_stor = 0.0;
  if (u >= 0.0) {
    double p_avail_ch = (dev.cap_max_kwh - dev.soc_kwh) * inv_dt;
    p_avail_ch = std::min(p_avail_ch, dev.p_max_kw - p_request);
    p_stor = std::min(p_request, p_avail_ch);
  } else {
    // Discharge availability is bounded by the stored energy and the
    // discharge limit (both negative; max keeps the tighter one).
    const double p_avail_dis =
        std::max(-dev.soc_kwh * inv_dt, dev.p_min_kw);
    p_stor = std::max(p_request, p_avail_dis);
  }
  if (dev.thermal()) {
    // A tank discharges only against current demand; it cannot export.
    p_stor = std::max(p_stor, -p_demand_kw);
  }

  dev.soc_kwh = std::clamp(
      dev.soc_kwh - dev.loss_kwh_per_step + p_stor * dev.dt_hours, 0.0,
      dev.cap_max_kwh);

  double consumption = demand_cons + inv_eta * p_stor;
  if (dev.thermal()) consumption = std::max(consumption, 0.0);
  return {consumption, p_stor};
}

PQ pv_output(const Building& bld, std::size_t t, const InverterSetting& s) {
  const double irr = bld.profiles ? bld.profiles->irradiance[t] : 0.0;
  const double apparent = bld.pv_rated_kw * irr * (1.0 - s.curtailment);
  return {apparent * std::cos(s.phase_lag_rad),
          apparent * std::sin(s.phase_lag_rad)};
}

PQ net_injection(Building& bld, std::size_t t, const DeviceActions& actions) {
  const ProfileSet& prof = *bld.profiles;

  double thermal_cons = 0.0;
  if (bld.hvac_tes) {
    const double u = actions.u_hvac.value_or(neutral_u(*bld.hvac_tes));
    thermal_cons += charge(*bld.hvac_tes, u, prof.hvac_demand_kw[t])
                        .electric_consumption_kw;
  } else {
    thermal_cons += prof.hvac_demand_kw[t];
  }
  if (bld.dhw_tes) {
    const double u = actions.u_dhw.value_or(neutral_u(*bld.dhw_tes));
    thermal_cons += charge(*bld.dhw_tes, u, prof.dhw_demand_kw[t])
                        .electric_consumption_kw;
  } else {
    thermal_cons += prof.dhw_demand_kw[t];
  }

  const PQ pv = pv_output(bld, t, actions.inverter);

  double p = pv.p_kw - prof.plug_load_kw[t] - thermal_cons;
  double q = pv.q_kvar;

  if (bld.battery) {
    const double u = actions.u_battery.value_or(neutral_u(*bld.battery));
    const double batt_cons =
        charge(*bld.battery, u, 0.0).electric_consumption_kw;
    if (batt_cons >= 0.0) {
      p -= batt_cons;  // charging draws through the meter
    } else {
      // Export goes through the shared inverter and is split by the same
      // phase lag as the PV.
      p += -batt_cons * std::cos(actions.inverter.phase_lag_rad);
      q += -batt_cons * std::sin(actions.inverter.phase_lag_rad);
    }
  }

  // Non-inverter load draws VARs at the fixed lagging power factor.
  const double load_kw = prof.plug_load_kw[t] + thermal_cons;
  q -= load_kw * std::tan(std::acos(bld.power_factor));

  return {p, q};
}

}  // namespace gridrl
