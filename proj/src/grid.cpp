#include "gridrl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gridrl/errors.hpp"

namespace gridrl {

namespace {

// Baran-Wu 33-bus feeder data. Branch impedances in ohms, loads at the
// receiving bus in kW / kvar; bus numbering 0-based with bus 0 the
// substation.
struct Ieee33Branch {
  int from;
  int to;
  double r_ohm;
  double x_ohm;
  double p_load_kw;   // at `to`
  double q_load_kvar;  // at `to`
};

constexpr Ieee33Branch kIeee33[] = {
    {0, 1, 0.0922, 0.0470, 100.0, 60.0},
    {1, 2, 0.4930, 0.2511, 90.0, 40.0},
    {2, 3, 0.3660, 0.1864, 120.0, 80.0},
    {3, 4, 0.3811, 0.1941, 60.0, 30.0},
    {4, 5, 0.8190, 0.7070, 60.0, 20.0},
    {5, 6, 0.1872, 0.6188, 200.0, 100.0},
    {6, 7, 0.7114, 0.2351, 200.0, 100.0},
    {7, 8, 1.0300, 0.7400, 60.0, 20.0},
    {8, 9, 1.0440, 0.7400, 60.0, 20.0},
    {9, 10, 0.1966, 0.0650, 45.0, 30.0},
    {10, 11, 0.3744, 0.1238, 60.0, 35.0},
    {11, 12, 1.4680, 1.1550, 60.0, 35.0},
    {12, 13, 0.5416, 0.7129, 120.0, 80.0},
    {13, 14, 0.5910, 0.5260, 60.0, 10.0},
    {14, 15, 0.7463, 0.5450, 60.0, 20.0},
    {15, 16, 1.2890, 1.7210, 60.0, 20.0},
    {16, 17, 0.7320, 0.5740, 90.0, 40.0},
    {1, 18, 0.1640, 0.1565, 90.0, 40.0},
    {18, 19, 1.5042, 1.3554, 90.0, 40.0},
    {19, 20, 0.4095, 0.4784, 90.0, 40.0},
    {20, 21, 0.7089, 0.9373, 90.0, 40.0},
    {2, 22, 0.4512, 0.3083, 90.0, 50.0},
    {22, 23, 0.8980, 0.7091, 420.0, 200.0},
    {23, 24, 0.8960, 0.7011, 420.0, 200.0},
    {5, 25, 0.2030, 0.1034, 60.0, 25.0},
    {25, 26, 0.2842, 0.1447, 60.0, 25.0},
    {26, 27, 1.0590, 0.9337, 60.0, 20.0},
    {27, 28, 0.8042, 0.7006, 120.0, 70.0},
    {28, 29, 0.5075, 0.2585, 200.0, 600.0},
    {29, 30, 0.9744, 0.9630, 150.0, 70.0},
    {30, 31, 0.3105, 0.3619, 210.0, 100.0},
    {31, 32, 0.3410, 0.5302, 60.0, 40.0},
};

constexpr double kIeee33BaseKv = 12.66;
constexpr double kIeee33BaseMva = 10.0;

int find_bus(const Network& net, int id) {
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    if (net.buses[i].id == id) return static_cast<int>(i);
  }
  throw UnknownBus(id);
}

}  // namespace

int Network::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].kind == BusKind::slack) return static_cast<int>(i);
  }
  throw ConfigError("network has no slack bus");
}

void Network::validate() const {
  if (buses.empty()) throw ConfigError("network has no buses");
  int slack_count = 0;
  for (const Bus& b : buses) {
    if (b.kind == BusKind::slack) ++slack_count;
    if (b.shunt_q_mvar < 0.0) {
      throw ConfigError("bus " + std::to_string(b.id) + " has shunt_q < 0");
    }
  }
  if (slack_count != 1) {
    throw ConfigError("network must have exactly one slack bus, found " +
                      std::to_string(slack_count));
  }
  if (p_mw.size() != buses.size() || q_mvar.size() != buses.size()) {
    throw ConfigError("injection arrays must have one entry per bus");
  }
  const int n = static_cast<int>(buses.size());
  std::vector<std::vector<int>> adjacency(n);
  for (const Line& ln : lines) {
    if (ln.from_bus == ln.to_bus) throw ConfigError("line connects a bus to itself");
    if (ln.from_bus < 0 || ln.from_bus >= n || ln.to_bus < 0 || ln.to_bus >= n) {
      throw ConfigError("line endpoint out of range");
    }
    if (ln.r_pu < 0.0 || ln.x_pu <= 0.0) {
      throw ConfigError("line impedance must satisfy r >= 0, x > 0");
    }
    adjacency[ln.from_bus].push_back(ln.to_bus);
    adjacency[ln.to_bus].push_back(ln.from_bus);
  }
  // Reachability from the slack.
  std::vector<char> seen(n, 0);
  std::vector<int> stack = {slack_index()};
  seen[stack.back()] = 1;
  while (!stack.empty()) {
    const int at = stack.back();
    stack.pop_back();
    for (int next : adjacency[at]) {
      if (!seen[next]) {
        seen[next] = 1;
        stack.push_back(next);
      }
    }
  }
  if (std::count(seen.begin(), seen.end(), 1) != n) {
    throw ConfigError("network graph is not connected to the slack bus");
  }
}

Network load_ieee33() {
  Network net;
  net.base_mva = kIeee33BaseMva;
  net.buses.resize(33);
  net.p_mw.assign(33, 0.0);
  net.q_mvar.assign(33, 0.0);
  for (int i = 0; i < 33; ++i) {
    net.buses[i].id = i;
    net.buses[i].kind = i == 0 ? BusKind::slack : BusKind::pq;
    net.buses[i].base_kv = kIeee33BaseKv;
  }
  const double z_base = kIeee33BaseKv * kIeee33BaseKv / kIeee33BaseMva;
  for (const Ieee33Branch& br : kIeee33) {
    net.lines.push_back(
        {br.from, br.to, br.r_ohm / z_base, br.x_ohm / z_base});
    net.p_mw[br.to] = -br.p_load_kw / 1000.0;
    net.q_mvar[br.to] = -br.q_load_kvar / 1000.0;
  }
  return net;
}

void set_bus_injection(Network& net, int bus, double p_mw, double q_mvar) {
  const int idx = find_bus(net, bus);
  net.p_mw[idx] = p_mw;
  net.q_mvar[idx] = q_mvar;
}

void set_seasonal_capacitors(Network& net, bool summer) {
  for (Bus& b : net.buses) b.shunt_q_mvar = 0.0;
  net.buses[find_bus(net, 14)].shunt_q_mvar = summer ? 1.8 : 1.2;
  if (summer) {
    net.buses[find_bus(net, 24)].shunt_q_mvar = 0.6;
    net.buses[find_bus(net, 30)].shunt_q_mvar = 1.2;
  }
}

PowerFlowResult solve_power_flow(Network& net, double tol, int max_iter) {
  if (tol <= 0.0) throw ConfigError("power flow tolerance must be positive");
  net.validate();

  const int n = static_cast<int>(net.buses.size());
  const int slack = net.slack_index();

  // Bus admittance matrix; capacitors are fixed Q injections, not shunt
  // admittances, so Ybus holds branch terms only.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (const Line& ln : net.lines) {
    const std::complex<double> y =
        1.0 / std::complex<double>(ln.r_pu, ln.x_pu);
    G(ln.from_bus, ln.from_bus) += y.real();
    B(ln.from_bus, ln.from_bus) += y.imag();
    G(ln.to_bus, ln.to_bus) += y.real();
    B(ln.to_bus, ln.to_bus) += y.imag();
    G(ln.from_bus, ln.to_bus) -= y.real();
    B(ln.from_bus, ln.to_bus) -= y.imag();
    G(ln.to_bus, ln.from_bus) -= y.real();
    B(ln.to_bus, ln.from_bus) -= y.imag();
  }

  // Scheduled injections in per-unit; slack power is free.
  Eigen::VectorXd p_spec(n);
  Eigen::VectorXd q_spec(n);
  for (int i = 0; i < n; ++i) {
    p_spec(i) = net.p_mw[i] / net.base_mva;
    q_spec(i) = (net.q_mvar[i] + net.buses[i].shunt_q_mvar) / net.base_mva;
  }

  std::vector<int> pq;  // solved buses, fixed order
  pq.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    if (i != slack) pq.push_back(i);
  }
  const int m = static_cast<int>(pq.size());

  Eigen::VectorXd vm = Eigen::VectorXd::Ones(n);  // flat start
  Eigen::VectorXd va = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd p_calc(n);
  Eigen::VectorXd q_calc(n);
  auto evaluate = [&]() {
    for (int i = 0; i < n; ++i) {
      double pi = 0.0;
      double qi = 0.0;
      for (int k = 0; k < n; ++k) {
        const double gb = G(i, k);
        const double bb = B(i, k);
        if (gb == 0.0 && bb == 0.0) continue;
        const double d = va(i) - va(k);
        const double c = std::cos(d);
        const double s = std::sin(d);
        pi += vm(k) * (gb * c + bb * s);
        qi += vm(k) * (gb * s - bb * c);
      }
      p_calc(i) = vm(i) * pi;
      q_calc(i) = vm(i) * qi;
    }
  };

  double max_mismatch = 0.0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    evaluate();
    Eigen::VectorXd mismatch(2 * m);
    for (int a = 0; a < m; ++a) {
      mismatch(a) = p_spec(pq[a]) - p_calc(pq[a]);
      mismatch(m + a) = q_spec(pq[a]) - q_calc(pq[a]);
    }
    max_mismatch = mismatch.cwiseAbs().maxCoeff();
    if (max_mismatch <= tol) {
      PowerFlowResult result;
      result.converged = true;
      result.iterations = iter;
      result.max_mismatch = max_mismatch;
      result.voltage_mag.assign(vm.data(), vm.data() + n);
      result.voltage_ang.assign(va.data(), va.data() + n);
      for (int i = 0; i < n; ++i) {
        net.buses[i].voltage_mag = vm(i);
        net.buses[i].voltage_ang = va(i);
      }
      return result;
    }

    // Jacobian in polar form: [dP/dth dP/dV; dQ/dth dQ/dV] over PQ buses.
    Eigen::MatrixXd jac(2 * m, 2 * m);
    for (int a = 0; a < m; ++a) {
      const int i = pq[a];
      for (int b = 0; b < m; ++b) {
        const int k = pq[b];
        if (i == k) {
          jac(a, b) = -q_calc(i) - B(i, i) * vm(i) * vm(i);
          jac(a, m + b) = p_calc(i) / vm(i) + G(i, i) * vm(i);
          jac(m + a, b) = p_calc(i) - G(i, i) * vm(i) * vm(i);
          jac(m + a, m + b) = q_calc(i) / vm(i) - B(i, i) * vm(i);
        } else {
          const double d = va(i) - va(k);
          const double c = std::cos(d);
          const double s = std::sin(d);
          const double gc_bs = G(i, k) * c + B(i, k) * s;
          const double gs_bc = G(i, k) * s - B(i, k) * c;
          jac(a, b) = vm(i) * vm(k) * gs_bc;
          jac(a, m + b) = vm(i) * gc_bs;
          jac(m + a, b) = -vm(i) * vm(k) * gc_bs;
          jac(m + a, m + b) = vm(i) * gs_bc;
        }
      }
    }

    const Eigen::VectorXd delta = jac.partialPivLu().solve(mismatch);
    if (!delta.allFinite()) break;
    for (int a = 0; a < m; ++a) {
      va(pq[a]) += delta(a);
      vm(pq[a]) += delta(m + a);
      if (vm(pq[a]) <= 0.0) vm(pq[a]) = 1e-6;  // keep magnitudes physical
    }
  }

  throw NonConvergence(max_iter, max_mismatch);
}

nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["base_mva"] = net.base_mva;
  j["buses"] = nlohmann::json::array();
  for (const Bus& b : net.buses) {
    j["buses"].push_back({{"id", b.id},
                          {"kind", b.kind == BusKind::slack ? "slack" : "pq"},
                          {"base_kv", b.base_kv},
                          {"shunt_q_mvar", b.shunt_q_mvar}});
  }
  j["lines"] = nlohmann::json::array();
  for (const Line& ln : net.lines) {
    j["lines"].push_back({{"from", ln.from_bus},
                          {"to", ln.to_bus},
                          {"r_pu", ln.r_pu},
                          {"x_pu", ln.x_pu}});
  }
  j["injections"] = nlohmann::json::array();
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    j["injections"].push_back({{"bus", net.buses[i].id},
                               {"p_mw", net.p_mw[i]},
                               {"q_mvar", net.q_mvar[i]}});
  }
  return j;
}

Network network_from_json(const nlohmann::json& j) {
  Network net;
  net.base_mva = j.at("base_mva").get<double>();
  for (const auto& jb : j.at("buses")) {
    Bus b;
    b.id = jb.at("id").get<int>();
    const std::string kind = jb.at("kind").get<std::string>();
    if (kind == "slack") {
      b.kind = BusKind::slack;
    } else if (kind == "pq") {
      b.kind = BusKind::pq;
    } else {
      throw ConfigError("unknown bus kind '" + kind + "'");
    }
    b.base_kv = jb.at("base_kv").get<double>();
    b.shunt_q_mvar = jb.value("shunt_q_mvar", 0.0);
    net.buses.push_back(b);
  }
  for (const auto& jl : j.at("lines")) {
    net.lines.push_back({jl.at("from").get<int>(), jl.at("to").get<int>(),
                         jl.at("r_pu").get<double>(),
                         jl.at("x_pu").get<double>()});
  }
  net.p_mw.assign(net.buses.size(), 0.0);
  net.q_mvar.assign(net.buses.size(), 0.0);
  if (j.contains("injections")) {
    for (const auto& ji : j.at("injections")) {
      const int idx = find_bus(net, ji.at("bus").get<int>());
      net.p_mw[idx] = ji.at("p_mw").get<double>();
      net.q_mvar[idx] = ji.at("q_mvar").get<double>();
    }
  }
  net.validate();
  return net;
}

Network load_network_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network file '" + path + "'");
  nlohmann::json j;
  in >> j;
  return network_from_json(j);
}

void save_network_json(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write network file '" + path + "'");
  out << network_to_json(net).dump(2) << '\n';
}

}  // namespace gridrl
