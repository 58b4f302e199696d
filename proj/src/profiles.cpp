#include "gridrl/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "gridrl/errors.hpp"

namespace gridrl {

namespace {

constexpr double kPi = 3.14159265358979323846;

int steps_per_hour(double dt_hours) {
  const double k = 1.0 / dt_hours;
  const int ki = static_cast<int>(std::lround(k));
  if (ki < 1 || std::abs(k - ki) > 1e-9) {
    throw ConfigError("dt must divide one hour, got " +
                      std::to_string(dt_hours));
  }
  return ki;
}

// 24-value diurnal shapes, normalized to peak 1.
struct DiurnalShapes {
  double hvac[24];
  double dhw[24];
  double plug[24];
};

const DiurnalShapes& shapes_for(BuildingUseType use) {
  static const DiurnalShapes residential = {
      // afternoon/evening cooling peak
      {0.30, 0.25, 0.22, 0.20, 0.20, 0.22, 0.28, 0.35, 0.40, 0.45, 0.52, 0.60,
       0.70, 0.80, 0.90, 0.97, 1.00, 0.98, 0.92, 0.82, 0.68, 0.55, 0.45, 0.35},
      // morning and evening draws
      {0.05, 0.03, 0.02, 0.02, 0.05, 0.25, 0.80, 1.00, 0.70, 0.40, 0.30, 0.28,
       0.30, 0.25, 0.22, 0.25, 0.35, 0.60, 0.85, 0.90, 0.70, 0.45, 0.20, 0.08},
      {0.35, 0.30, 0.28, 0.28, 0.30, 0.35, 0.50, 0.60, 0.55, 0.50, 0.48, 0.50,
       0.52, 0.50, 0.50, 0.55, 0.65, 0.85, 1.00, 0.98, 0.90, 0.75, 0.55, 0.42}};
  static const DiurnalShapes office = {
      {0.15, 0.12, 0.10, 0.10, 0.12, 0.20, 0.45, 0.70, 0.88, 0.95, 1.00, 1.00,
       0.98, 1.00, 0.98, 0.92, 0.80, 0.60, 0.40, 0.25, 0.20, 0.18, 0.16, 0.15},
      {0.02, 0.02, 0.02, 0.02, 0.02, 0.05, 0.30, 0.60, 0.80, 0.85, 0.90, 1.00,
       0.95, 0.80, 0.70, 0.60, 0.45, 0.25, 0.10, 0.05, 0.03, 0.02, 0.02, 0.02},
      {0.20, 0.18, 0.18, 0.18, 0.20, 0.28, 0.55, 0.80, 0.95, 1.00, 1.00, 0.98,
       0.95, 0.98, 0.96, 0.90, 0.78, 0.55, 0.35, 0.28, 0.25, 0.22, 0.20, 0.20}};
  static const DiurnalShapes retail = {
      {0.15, 0.12, 0.10, 0.10, 0.12, 0.18, 0.30, 0.50, 0.70, 0.85, 0.95, 1.00,
       1.00, 1.00, 0.98, 0.95, 0.92, 0.88, 0.80, 0.65, 0.45, 0.30, 0.22, 0.18},
      {0.03, 0.02, 0.02, 0.02, 0.03, 0.08, 0.25, 0.50, 0.70, 0.85, 0.95, 1.00,
       1.00, 0.95, 0.90, 0.85, 0.75, 0.60, 0.45, 0.30, 0.15, 0.08, 0.05, 0.03},
      {0.22, 0.20, 0.20, 0.20, 0.22, 0.25, 0.40, 0.60, 0.80, 0.92, 1.00, 1.00,
       0.98, 0.98, 0.96, 0.95, 0.92, 0.88, 0.75, 0.55, 0.40, 0.30, 0.25, 0.22}};
  switch (use) {
    case BuildingUseType::office:
      return office;
    case BuildingUseType::retail:
      return retail;
    default:
      return residential;
  }
}

// Seasonal factor in [0,1]: 1 at midsummer (day 172), 0 at midwinter.
double season_factor(int day_of_year) {
  return 0.5 - 0.5 * std::cos(2.0 * kPi * (day_of_year - 10) / 365.0);
}

double lerp(double a, double b, double f) { return a + (b - a) * f; }

}  // namespace

BuildingUseType use_type_from_string(const std::string& s) {
  if (s == "residential") return BuildingUseType::residential;
  if (s == "office") return BuildingUseType::office;
  if (s == "retail") return BuildingUseType::retail;
  throw ConfigError("unknown building use type '" + s + "'");
}

std::string to_string(BuildingUseType t) {
  switch (t) {
    case BuildingUseType::office:
      return "office";
    case BuildingUseType::retail:
      return "retail";
    default:
      return "residential";
  }
}

ProfileSet upsample_profiles(const ProfileSet& hourly, double dt_hours,
                             RandomStream& rng) {
  if (std::abs(hourly.dt_hours - 1.0) > 1e-9) {
    throw ConfigError("upsampling expects an hourly input series");
  }
  const int k = steps_per_hour(dt_hours);
  const std::size_t hours = hourly.size();

  ProfileSet out;
  out.dt_hours = dt_hours;
  const std::size_t n = hours * static_cast<std::size_t>(k);
  out.hvac_demand_kw.reserve(n);
  out.dhw_demand_kw.reserve(n);
  out.plug_load_kw.reserve(n);
  out.irradiance.reserve(n);
  out.outdoor_temp_c.reserve(n);

  auto at_or_last = [&](const std::vector<double>& v, std::size_t h) {
    return v[std::min(h, hours - 1)];
  };

  std::vector<double> weights(k);
  for (std::size_t h = 0; h < hours; ++h) {
    // Hot water: the hour's energy is divided randomly across the
    // subintervals so the hourly total is conserved exactly.
    double wsum = 0.0;
    for (int j = 0; j < k; ++j) {
      weights[j] = rng.uniform();
      wsum += weights[j];
    }
    const double dhw_energy = hourly.dhw_demand_kw[h] * 1.0;  // kWh
    for (int j = 0; j < k; ++j) {
      const double f = static_cast<double>(j) / k;
      out.hvac_demand_kw.push_back(
          lerp(hourly.hvac_demand_kw[h], at_or_last(hourly.hvac_demand_kw, h + 1), f));
      out.plug_load_kw.push_back(
          lerp(hourly.plug_load_kw[h], at_or_last(hourly.plug_load_kw, h + 1), f));
      out.outdoor_temp_c.push_back(
          lerp(hourly.outdoor_temp_c[h], at_or_last(hourly.outdoor_temp_c, h + 1), f));

      const double irr_base =
          lerp(hourly.irradiance[h], at_or_last(hourly.irradiance, h + 1), f);
      const double noisy = irr_base;  // noise added below, multiplicative
      out.irradiance.push_back(noisy);

      out.dhw_demand_kw.push_back(
          wsum > 0.0 ? dhw_energy * (weights[j] / wsum) / dt_hours : 0.0);
    }
  }

  // Multiplicative noise keeps night hours exactly zero and cannot push the
  // factor outside [0, 1].
  for (double& irr : out.irradiance) {
    if (irr > 0.0) {
      irr = std::clamp(irr * (1.0 + 0.05 * rng.normal()), 0.0, 1.0);
    }
  }

  out.validate();
  return out;
}

ProfileSet synthesize_profiles(std::uint64_t seed, int days, double dt_hours,
                               const SynthOptions& options) {
  if (days < 1) throw ConfigError("profile synthesis needs days >= 1");
  steps_per_hour(dt_hours);  // validates dt

  RandomStream rng = RandomStream(seed).substream("profiles");
  RandomStream day_rng = rng.substream("day-jitter");
  RandomStream cloud_rng = rng.substream("clouds");
  RandomStream upsample_rng = rng.substream("upsample");

  const DiurnalShapes& shapes = shapes_for(options.use);

  ProfileSet hourly;
  hourly.dt_hours = 1.0;
  for (int d = 0; d < days; ++d) {
    const int doy = (options.start_day_of_year + d) % 365;
    const double season = season_factor(doy);

    // Day-level multipliers.
    const double demand_jitter =
        std::max(0.0, 1.0 + options.day_jitter * day_rng.normal());
    const double cloud_clear =
        std::clamp(1.0 - options.cloudiness * (0.5 + cloud_rng.uniform()), 0.0, 1.0);

    // Daylight window widens with the season.
    const double half_day = 5.0 + 2.0 * season;  // hours around noon
    const double temp_mean =
        lerp(options.temp_min_c, options.temp_max_c, 0.25 + 0.5 * season);
    const double temp_swing =
        0.25 * (options.temp_max_c - options.temp_min_c);

    for (int h = 0; h < 24; ++h) {
      const double hvac_season = 0.35 + 0.65 * season;  // cooling-dominated
      hourly.hvac_demand_kw.push_back(options.hvac_peak_kw * hvac_season *
                                      shapes.hvac[h] * demand_jitter);
      hourly.dhw_demand_kw.push_back(options.dhw_peak_kw * shapes.dhw[h] *
                                     demand_jitter);
      hourly.plug_load_kw.push_back(options.plug_peak_kw * shapes.plug[h] *
                                    demand_jitter);

      const double from_noon = h + 0.5 - 12.0;
      double irr = 0.0;
      if (std::abs(from_noon) < half_day) {
        irr = std::cos(0.5 * kPi * from_noon / half_day);
        irr = cloud_clear * irr * irr;
      }
      hourly.irradiance.push_back(std::clamp(irr, 0.0, 1.0));

      hourly.outdoor_temp_c.push_back(
          temp_mean - temp_swing * std::cos(2.0 * kPi * (h - 3.0) / 24.0));
    }
  }
  hourly.validate();

  if (std::abs(dt_hours - 1.0) < 1e-9) return hourly;
  return upsample_profiles(hourly, dt_hours, upsample_rng);
}

ProfileSet load_profiles_csv(const std::string& path, double dt_hours,
                             std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open profile file '" + path + "'");

  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty profile file");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  std::vector<std::string> columns;
  {
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) columns.push_back(cell);
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    index[columns[i]] = static_cast<int>(i);
  }
  for (const char* required :
       {"timestamp", "hvac_demand_kw", "dhw_demand_kw", "plug_load_kw",
        "irradiance", "outdoor_temp_c"}) {
    if (!index.count(required)) {
      throw SchemaError("profile file is missing column '" +
                        std::string(required) + "'");
    }
  }

  auto parse_timestamp = [&](const std::string& text) -> long long {
    int y, mo, d, h, mi, s;
    if (std::sscanf(text.c_str(), "%d-%d-%d%*c%d:%d:%d", &y, &mo, &d, &h, &mi,
                    &s) != 6) {
      throw ParseError("bad timestamp '" + text + "'");
    }
    // Days since a fixed epoch; month/day folded via the civil-days formula.
    const int a = (mo <= 2) ? y - 1 : y;
    const int m = (mo <= 2) ? mo + 12 : mo;
    const long long days = 365LL * a + a / 4 - a / 100 + a / 400 +
                           (153 * (m - 3) + 2) / 5 + d - 1;
    return days * 86400LL + h * 3600LL + mi * 60LL + s;
  };

  ProfileSet raw;
  std::vector<long long> stamps;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns.size()) {
      throw ParseError("row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(columns.size()));
    }
    auto number = [&](const char* col) {
      const std::string& text = cells[index[col]];
      try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
      } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ": bad number '" +
                         text + "' in column " + col);
      }
    };
    stamps.push_back(parse_timestamp(cells[index["timestamp"]]));
    raw.hvac_demand_kw.push_back(number("hvac_demand_kw"));
    raw.dhw_demand_kw.push_back(number("dhw_demand_kw"));
    raw.plug_load_kw.push_back(number("plug_load_kw"));
    raw.irradiance.push_back(number("irradiance"));
    raw.outdoor_temp_c.push_back(number("outdoor_temp_c"));
  }
  if (stamps.size() < 2) {
    throw ParseError("profile file needs at least two data rows");
  }

  const long long interval_s = stamps[1] - stamps[0];
  if (interval_s <= 0) throw ParseError("timestamps must be increasing");
  for (std::size_t i = 2; i < stamps.size(); ++i) {
    if (stamps[i] - stamps[i - 1] != interval_s) {
      throw ParseError("timestamps are not evenly spaced at row " +
                       std::to_string(i + 2));
    }
  }
  raw.dt_hours = static_cast<double>(interval_s) / 3600.0;
  raw.validate();  // UnitError for negative demand / bad irradiance

  const double ratio = raw.dt_hours / dt_hours;
  if (std::abs(ratio - 1.0) < 1e-9) return raw;
  if (ratio < 1.0) {
    throw ConfigError("profile interval is finer than the requested dt");
  }
  if (std::abs(raw.dt_hours - 1.0) > 1e-9) {
    throw ConfigError("upsampling is supported from hourly files only");
  }
  RandomStream rng = RandomStream(seed).substream("csv-upsample");
  return upsample_profiles(raw, dt_hours, rng);
}

}  // namespace gridrl
