#pragma once

#include <cstdint>
#include <string>

#include "gridrl/building.hpp"
#include "gridrl/rng.hpp"

namespace gridrl {

enum class BuildingUseType { residential, office, retail };

BuildingUseType use_type_from_string(const std::string& s);
std::string to_string(BuildingUseType t);

/// Knobs for the synthetic diurnal templates. Peaks are per building; the
/// desk-scale preset treats one "building" as an aggregated block, so the
/// defaults are deliberately large.
struct SynthOptions {
  BuildingUseType use = BuildingUseType::residential;
  double hvac_peak_kw = 30.0;
  double dhw_peak_kw = 8.0;
  double plug_peak_kw = 25.0;
  double temp_min_c = 12.0;
  double temp_max_c = 33.0;
  double cloudiness = 0.15;       // mean fractional irradiance loss
  double solar_noise = 0.05;      // subhourly noise applied on upsampling
  double day_jitter = 0.08;       // day-to-day demand variation
  int start_day_of_year = 172;    // day 0 of the series
};

/// Builds hourly diurnal templates for the requested use type and applies
/// the three upsampling rules: linear interpolation for weather and HVAC
/// (plug load is treated like HVAC), interpolation with multiplicative noise
/// for irradiance, and random division of each hour's energy across the
/// subhourly intervals for hot water. Deterministic for a fixed seed.
ProfileSet synthesize_profiles(std::uint64_t seed, int days, double dt_hours,
                               const SynthOptions& options = {});

/// Upsamples an hourly ProfileSet to dt_hours using the same three rules.
/// dt must divide one hour.
ProfileSet upsample_profiles(const ProfileSet& hourly, double dt_hours,
                             RandomStream& rng);

/// Reads the documented profile CSV (header row, ISO-8601 `timestamp`
/// column, then hvac_demand_kw, dhw_demand_kw, plug_load_kw, irradiance,
/// outdoor_temp_c in any order). If the file's interval is coarser than dt
/// the series is upsampled with the standard rules; the seed feeds the
/// random hot-water division. Throws ParseError, SchemaError or UnitError.
ProfileSet load_profiles_csv(const std::string& path, double dt_hours,
                             std::uint64_t seed = 0);

}  // namespace gridrl
