#include "gridrl/log.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridrl/errors.hpp"

namespace gridrl {

namespace {

// Shortest round-trippable decimal form; locale-independent and stable, so
// same-seed runs produce byte-identical files.
std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  double parsed = 0.0;
  std::sscanf(buf, "%lf", &parsed);
  for (int prec = 1; prec <= 16; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, x);
    std::sscanf(shorter, "%lf", &parsed);
    if (parsed == x) return shorter;
  }
  return buf;
}

}  // namespace

void EpisodeLog::validate() const {
  if (num_steps == 0) throw EmptyLog("episode log has no steps");
  if (voltages.size() != num_steps * num_buses ||
      actions.size() != num_steps * num_agents * kActionSlots ||
      socs.size() != num_steps * num_agents * kSocSlots ||
      rewards.size() != num_steps * num_agents) {
    throw ShapeMismatch("episode log arrays do not share the step dimension");
  }
  for (double v : voltages) {
    if (v <= 0.0) throw ShapeMismatch("episode log contains a non-positive voltage");
  }
}

std::vector<std::string> write_episode_csv(const EpisodeLog& log,
                                           const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream out(fs::path(dir) / "voltages.csv");
    out << "step,bus,voltage_pu\n";
    for (std::size_t s = 0; s < log.num_steps; ++s) {
      for (std::size_t b = 0; b < log.num_buses; ++b) {
        out << s << ',' << b << ',' << fmt(log.voltage(s, b)) << '\n';
      }
    }
  }
  {
    std::ofstream out(fs::path(dir) / "agents.csv");
    out << "step,agent,action_hvac,action_dhw,action_curtail,action_phase,"
           "soc_hvac_kwh,soc_dhw_kwh,soc_batt_kwh,reward\n";
    for (std::size_t s = 0; s < log.num_steps; ++s) {
      for (std::size_t a = 0; a < log.num_agents; ++a) {
        out << s << ',' << a;
        for (std::size_t k = 0; k < EpisodeLog::kActionSlots; ++k) {
          out << ',' << fmt(log.action(s, a, k));
        }
        for (std::size_t k = 0; k < EpisodeLog::kSocSlots; ++k) {
          out << ',' << fmt(log.soc(s, a, k));
        }
        out << ',' << fmt(log.reward(s, a)) << '\n';
      }
    }
  }
  {
    nlohmann::json meta = {{"dt_hours", log.dt_hours},
                           {"steps", log.num_steps},
                           {"buses", log.num_buses},
                           {"agents", log.num_agents}};
    std::ofstream out(fs::path(dir) / "episode_meta.json");
    out << meta.dump(2) << '\n';
  }
  return {"voltages.csv", "agents.csv", "episode_meta.json"};
}

EpisodeLog read_episode_csv(const std::string& dir) {
  namespace fs = std::filesystem;
  EpisodeLog log;
  {
    std::ifstream in(fs::path(dir) / "episode_meta.json");
    if (!in) throw ConfigError("missing episode_meta.json in '" + dir + "'");
    nlohmann::json meta;
    in >> meta;
    log.dt_hours = meta.at("dt_hours").get<double>();
    log.num_steps = meta.at("steps").get<std::size_t>();
    log.num_buses = meta.at("buses").get<std::size_t>();
    log.num_agents = meta.at("agents").get<std::size_t>();
  }
  log.voltages.assign(log.num_steps * log.num_buses, 0.0);
  log.actions.assign(log.num_steps * log.num_agents * EpisodeLog::kActionSlots, 0.0);
  log.socs.assign(log.num_steps * log.num_agents * EpisodeLog::kSocSlots, 0.0);
  log.rewards.assign(log.num_steps * log.num_agents, 0.0);

  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };

  {
    std::ifstream in(fs::path(dir) / "voltages.csv");
    if (!in) throw ConfigError("missing voltages.csv in '" + dir + "'");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split(line);
      if (cells.size() != 3) throw ParseError("bad voltages.csv row: " + line);
      const std::size_t s = std::stoull(cells[0]);
      const std::size_t b = std::stoull(cells[1]);
      log.voltages[s * log.num_buses + b] = std::stod(cells[2]);
    }
  }
  {
    std::ifstream in(fs::path(dir) / "agents.csv");
    if (!in) throw ConfigError("missing agents.csv in '" + dir + "'");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split(line);
      if (cells.size() != 10) throw ParseError("bad agents.csv row: " + line);
      const std::size_t s = std::stoull(cells[0]);
      const std::size_t a = std::stoull(cells[1]);
      for (std::size_t k = 0; k < 4; ++k) {
        log.actions[(s * log.num_agents + a) * 4 + k] = std::stod(cells[2 + k]);
      }
      for (std::size_t k = 0; k < 3; ++k) {
        log.socs[(s * log.num_agents + a) * 3 + k] = std::stod(cells[6 + k]);
      }
      log.rewards[s * log.num_agents + a] = std::stod(cells[9]);
    }
  }
  log.validate();
  return log;
}

}  // namespace gridrl
