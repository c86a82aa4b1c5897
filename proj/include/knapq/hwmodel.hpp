#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "knapq/circuits.hpp"
#include "knapq/rng.hpp"

namespace knapq {

// Native gate set of the modeled superconducting device. Rz is virtual
// (zero duration); Sx/X are fixed-length pulses; Cx carries the only
// two-qubit cost.
enum class NativeKind { Rz, Sx, X, Cx };

inline const char* to_string(NativeKind k) {
  switch (k) {
    case NativeKind::Rz: return "rz";
    case NativeKind::Sx: return "sx";
    case NativeKind::X: return "x";
    case NativeKind::Cx: return "cx";
  }
  return "?";
}

struct NativeGate {
  NativeKind kind;
  int q0 = 0;
  int q1 = -1;
  double angle = 0.0;
};

struct NativeCircuit {
  int num_qubits = 0;
  std::vector<NativeGate> gates;
};

struct GateDurations {
  double rz_ns = 0.0;
  double sx_ns = 35.56;
  double x_ns = 35.56;
  double cx_ns = 370.0;
  double cx_spread_ns = 80.0;  // cross-edge variation, applied only on request
};

struct DeviceModel {
  int num_qubits = 0;
  std::vector<std::pair<int, int>> edges;  // undirected, a < b
  GateDurations durations;
  double t_meas_ns = 1000.0;
  std::vector<int> path_order;  // optional preferred physical ordering for layouts
  std::map<std::pair<int, int>, double> cx_duration;  // per-edge override (jitter)

  bool coupled(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
  }

  double cx_time(int a, int b) const {
    if (a > b) std::swap(a, b);
    const auto it = cx_duration.find({a, b});
    return it == cx_duration.end() ? durations.cx_ns : it->second;
  }
};

inline std::vector<std::vector<int>> adjacency_lists(const DeviceModel& dev) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(dev.num_qubits));
  for (const auto& [a, b] : dev.edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

inline std::vector<std::vector<int>> all_pairs_distances(const DeviceModel& dev) {
  const auto adj = adjacency_lists(dev);
  const int n = dev.num_qubits;
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(n),
                                     std::vector<int>(static_cast<std::size_t>(n), -1));
  for (int s = 0; s < n; ++s) {
    auto& d = dist[static_cast<std::size_t>(s)];
    d[static_cast<std::size_t>(s)] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj[static_cast<std::size_t>(u)])
        if (d[static_cast<std::size_t>(v)] < 0) {
          d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        }
    }
  }
  return dist;
}

// 65-qubit heavy-hex lattice: five qubit rows stitched by bridge qubits,
// the connectivity of the IBM Hummingbird family. path_order is a
// Hamiltonian-style snake through the rows so that consecutive logical
// qubits land on coupled physical qubits.
inline DeviceModel heavy_hex_65() {
  DeviceModel dev;
  dev.num_qubits = 65;
  auto edge = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    dev.edges.emplace_back(a, b);
  };
  const std::vector<std::pair<int, int>> rows = {
      {0, 9}, {13, 23}, {27, 37}, {41, 51}, {55, 64}};
  for (const auto& [lo, hi] : rows)
    for (int q = lo; q < hi; ++q) edge(q, q + 1);
  // bridge qubit, upper attachment, lower attachment
  const std::vector<std::array<int, 3>> bridges = {
      {10, 0, 13},  {11, 4, 17},  {12, 8, 21},   // row 1 <-> 2
      {24, 15, 29}, {25, 19, 33}, {26, 23, 37},  // row 2 <-> 3
      {38, 27, 41}, {39, 31, 45}, {40, 35, 49},  // row 3 <-> 4
      {52, 43, 56}, {53, 47, 60}, {54, 51, 64},  // row 4 <-> 5
  };
  for (const auto& [mid, up, down] : bridges) {
    edge(up, mid);
    edge(mid, down);
  }
  std::sort(dev.edges.begin(), dev.edges.end());

  auto append_range = [&](int from, int to) {
    if (from <= to)
      for (int q = from; q <= to; ++q) dev.path_order.push_back(q);
    else
      for (int q = from; q >= to; --q) dev.path_order.push_back(q);
  };
  append_range(9, 0);
  dev.path_order.push_back(10);
  append_range(13, 23);
  dev.path_order.push_back(26);
  append_range(37, 27);
  dev.path_order.push_back(38);
  append_range(41, 51);
  dev.path_order.push_back(54);
  append_range(64, 55);
  // bridge qubits not on the snake go last
  for (int q : {11, 12, 24, 25, 39, 40, 52, 53}) dev.path_order.push_back(q);
  return dev;
}

// Draws one per-edge CX duration from mean +- spread. Separate from the
// device constructor so the default stays the published mean.
inline void apply_cx_jitter(DeviceModel& dev, std::uint64_t seed) {
  Rng rng(seed);
  dev.cx_duration.clear();
  for (const auto& e : dev.edges)
    dev.cx_duration[e] =
        dev.durations.cx_ns +
        rng.uniform(-dev.durations.cx_spread_ns, dev.durations.cx_spread_ns);
}

inline nlohmann::json device_to_json(const DeviceModel& dev) {
  nlohmann::json j{{"num_qubits", dev.num_qubits},
                   {"edges", dev.edges},
                   {"gate_durations_ns",
                    {{"rz", dev.durations.rz_ns},
                     {"sx", dev.durations.sx_ns},
                     {"x", dev.durations.x_ns},
                     {"cx", dev.durations.cx_ns},
                     {"cx_spread", dev.durations.cx_spread_ns}}},
                   {"t_meas_ns", dev.t_meas_ns}};
  if (!dev.path_order.empty()) j["path_order"] = dev.path_order;
  return j;
}

inline DeviceModel device_from_json(const nlohmann::json& j, const std::string& where) {
  auto need = [&](const char* field) -> const nlohmann::json& {
    if (!j.contains(field)) throw std::runtime_error(where + ": missing field '" + field + "'");
    return j.at(field);
  };
  DeviceModel dev;
  try {
    dev.num_qubits = need("num_qubits").get<int>();
    dev.edges = need("edges").get<std::vector<std::pair<int, int>>>();
    const auto& d = need("gate_durations_ns");
    dev.durations.rz_ns = d.value("rz", 0.0);
    dev.durations.sx_ns = d.value("sx", 35.56);
    dev.durations.x_ns = d.value("x", 35.56);
    dev.durations.cx_ns = d.value("cx", 370.0);
    dev.durations.cx_spread_ns = d.value("cx_spread", 0.0);
    dev.t_meas_ns = j.value("t_meas_ns", 1000.0);
    if (j.contains("path_order")) dev.path_order = j.at("path_order").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
  for (auto& [a, b] : dev.edges)
    if (a > b) std::swap(a, b);
  std::sort(dev.edges.begin(), dev.edges.end());
  for (const auto& [a, b] : dev.edges)
    if (a < 0 || b >= dev.num_qubits || a == b)
      throw std::runtime_error(where + ": edge endpoints out of range");
  return dev;
}

inline void save_device(const DeviceModel& dev, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << device_to_json(dev).dump(2) << "\n";
}

inline DeviceModel load_device(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open device file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("device file " + path + ": " + e.what());
  }
  return device_from_json(j, "device file " + path);
}

// Rewrites the abstract gate set over {Rz, Sx, X, Cx}, each rule exact up
// to global phase:
//   H       -> Sx, Rz(pi/2), Sx
//   Ry(t)   -> Rz(-pi), Sx, Rz(pi - t), Sx
//   Rx(t)   -> Rz(-pi/2), Sx, Rz(pi - t), Sx, Rz(-pi/2)
//   Zz(a)   -> Cx, Rz(a) on the target, Cx
inline NativeCircuit decompose(const Circuit& circuit) {
  constexpr double pi = std::numbers::pi;
  NativeCircuit out;
  out.num_qubits = circuit.num_qubits;
  for (const Gate& g : circuit.gates) {
    switch (g.kind) {
      case GateKind::H:
        out.gates.push_back({NativeKind::Sx, g.q0});
        out.gates.push_back({NativeKind::Rz, g.q0, -1, 0.5 * pi});
        out.gates.push_back({NativeKind::Sx, g.q0});
        break;
      case GateKind::X:
        out.gates.push_back({NativeKind::X, g.q0});
        break;
      case GateKind::Ry:
        out.gates.push_back({NativeKind::Rz, g.q0, -1, -pi});
        out.gates.push_back({NativeKind::Sx, g.q0});
        out.gates.push_back({NativeKind::Rz, g.q0, -1, pi - g.angle});
        out.gates.push_back({NativeKind::Sx, g.q0});
        break;
      case GateKind::Rx:
        out.gates.push_back({NativeKind::Rz, g.q0, -1, -0.5 * pi});
        out.gates.push_back({NativeKind::Sx, g.q0});
        out.gates.push_back({NativeKind::Rz, g.q0, -1, pi - g.angle});
        out.gates.push_back({NativeKind::Sx, g.q0});
        out.gates.push_back({NativeKind::Rz, g.q0, -1, -0.5 * pi});
        break;
      case GateKind::Rz:
        out.gates.push_back({NativeKind::Rz, g.q0, -1, g.angle});
        break;
      case GateKind::Cx:
        out.gates.push_back({NativeKind::Cx, g.q0, g.q1});
        break;
      case GateKind::Zz:
        out.gates.push_back({NativeKind::Cx, g.q0, g.q1});
        out.gates.push_back({NativeKind::Rz, g.q1, -1, g.angle});
        out.gates.push_back({NativeKind::Cx, g.q0, g.q1});
        break;
    }
  }
  return out;
}

struct RoutedCircuit {
  NativeCircuit circuit;               // gates act on physical qubits
  std::vector<int> initial_layout;     // logical -> physical
  std::vector<int> final_layout;
  int swap_count = 0;
};

// Greedy router: logical qubits start on the device's path order (or
// 0..n-1), and every non-adjacent CX pulls its endpoints together one SWAP
// (three CX) at a time, always along a distance-reducing neighbor. Ties are
// broken by the seeded stream.
inline RoutedCircuit route(const NativeCircuit& circuit, const DeviceModel& dev,
                           std::uint64_t seed) {
  if (circuit.num_qubits > dev.num_qubits)
    throw std::invalid_argument("circuit needs more qubits than the device has");
  const auto dist = all_pairs_distances(dev);
  for (int a = 0; a < dev.num_qubits; ++a)
    for (int b = 0; b < dev.num_qubits; ++b)
      if (dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] < 0)
        throw std::invalid_argument("device coupling map is disconnected");
  const auto adj = adjacency_lists(dev);

  RoutedCircuit out;
  out.circuit.num_qubits = dev.num_qubits;
  std::vector<int> phys_of(static_cast<std::size_t>(circuit.num_qubits));
  for (int l = 0; l < circuit.num_qubits; ++l)
    phys_of[static_cast<std::size_t>(l)] =
        dev.path_order.empty() ? l : dev.path_order[static_cast<std::size_t>(l)];
  out.initial_layout = phys_of;
  std::vector<int> logical_at(static_cast<std::size_t>(dev.num_qubits), -1);
  for (int l = 0; l < circuit.num_qubits; ++l)
    logical_at[static_cast<std::size_t>(phys_of[static_cast<std::size_t>(l)])] = l;

  Rng rng(seed);
  auto emit_swap = [&](int a, int b) {  // physical, adjacent
    out.circuit.gates.push_back({NativeKind::Cx, a, b});
    out.circuit.gates.push_back({NativeKind::Cx, b, a});
    out.circuit.gates.push_back({NativeKind::Cx, a, b});
    ++out.swap_count;
    const int la = logical_at[static_cast<std::size_t>(a)];
    const int lb = logical_at[static_cast<std::size_t>(b)];
    logical_at[static_cast<std::size_t>(a)] = lb;
    logical_at[static_cast<std::size_t>(b)] = la;
    if (la >= 0) phys_of[static_cast<std::size_t>(la)] = b;
    if (lb >= 0) phys_of[static_cast<std::size_t>(lb)] = a;
  };

  for (const NativeGate& g : circuit.gates) {
    if (g.kind != NativeKind::Cx) {
      NativeGate mapped = g;
      mapped.q0 = phys_of[static_cast<std::size_t>(g.q0)];
      out.circuit.gates.push_back(mapped);
      continue;
    }
    while (true) {
      const int a = phys_of[static_cast<std::size_t>(g.q0)];
      const int b = phys_of[static_cast<std::size_t>(g.q1)];
      const int d = dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      if (d == 1) {
        out.circuit.gates.push_back({NativeKind::Cx, a, b});
        break;
      }
      // candidate swaps: move either endpoint one step toward the other
      std::vector<std::pair<int, int>> best;
      int best_d = d;
      auto consider = [&](int from, int to, int other) {
        const int nd = dist[static_cast<std::size_t>(to)][static_cast<std::size_t>(other)];
        if (nd < best_d) {
          best_d = nd;
          best.clear();
        }
        if (nd == best_d) best.emplace_back(from, to);
      };
      for (int u : adj[static_cast<std::size_t>(a)]) consider(a, u, b);
      for (int v : adj[static_cast<std::size_t>(b)]) consider(b, v, a);
      const auto& pick = best[static_cast<std::size_t>(rng.uniform_index(static_cast<int>(best.size())))];
      emit_swap(pick.first, pick.second);
    }
  }
  out.final_layout = phys_of;
  return out;
}

struct ScheduledGate {
  NativeGate gate;
  double start_ns = 0.0;
  double duration_ns = 0.0;
};

struct ScheduledCircuit {
  std::vector<ScheduledGate> gates;
  double t_circ_ns = 0.0;  // makespan
  int depth = 0;
  int swap_count = 0;
};

// As-soon-as-possible schedule: every gate starts at the latest ready time
// of its qubits. Depth counts gates along the per-qubit dependency chains.
inline ScheduledCircuit schedule(const NativeCircuit& circuit, const DeviceModel& dev) {
  std::vector<double> ready(static_cast<std::size_t>(dev.num_qubits), 0.0);
  std::vector<int> chain(static_cast<std::size_t>(dev.num_qubits), 0);
  ScheduledCircuit out;
  out.gates.reserve(circuit.gates.size());
  for (const NativeGate& g : circuit.gates) {
    double dur = 0.0;
    switch (g.kind) {
      case NativeKind::Rz: dur = dev.durations.rz_ns; break;
      case NativeKind::Sx: dur = dev.durations.sx_ns; break;
      case NativeKind::X: dur = dev.durations.x_ns; break;
      case NativeKind::Cx:
        if (!dev.coupled(g.q0, g.q1))
          throw std::invalid_argument("schedule needs a routed circuit: CX on uncoupled pair " +
                                      std::to_string(g.q0) + "," + std::to_string(g.q1));
        dur = dev.cx_time(g.q0, g.q1);
        break;
    }
    double start = ready[static_cast<std::size_t>(g.q0)];
    int depth_in = chain[static_cast<std::size_t>(g.q0)];
    if (g.q1 >= 0) {
      start = std::max(start, ready[static_cast<std::size_t>(g.q1)]);
      depth_in = std::max(depth_in, chain[static_cast<std::size_t>(g.q1)]);
    }
    const double end = start + dur;
    ready[static_cast<std::size_t>(g.q0)] = end;
    chain[static_cast<std::size_t>(g.q0)] = depth_in + 1;
    if (g.q1 >= 0) {
      ready[static_cast<std::size_t>(g.q1)] = end;
      chain[static_cast<std::size_t>(g.q1)] = depth_in + 1;
    }
    out.gates.push_back({g, start, dur});
    out.t_circ_ns = std::max(out.t_circ_ns, end);
    out.depth = std::max(out.depth, depth_in + 1);
  }
  return out;
}

inline ScheduledCircuit schedule(const RoutedCircuit& routed, const DeviceModel& dev) {
  ScheduledCircuit out = schedule(routed.circuit, dev);
  out.swap_count = routed.swap_count;
  return out;
}

// Total algorithm runtime: n_iter * [n_samp*(t_circ + t_meas) + t_opt + t_comm],
// inputs in nanoseconds, result in seconds.
inline double total_runtime_seconds(long long n_iter, long long n_samp, double t_circ_ns,
                                    double t_meas_ns, double t_opt_ns, double t_comm_ns) {
  if (n_iter < 0 || n_samp < 0 || t_circ_ns < 0 || t_meas_ns < 0 || t_opt_ns < 0 ||
      t_comm_ns < 0)
    throw std::invalid_argument("runtime model inputs must be non-negative");
  const double per_iter = static_cast<double>(n_samp) * (t_circ_ns + t_meas_ns) +
                          t_opt_ns + t_comm_ns;
  return static_cast<double>(n_iter) * per_iter * 1e-9;
}

inline void write_schedule_csv(const ScheduledCircuit& sched, std::ostream& out) {
  out << "gate,qubits,start_ns,duration_ns\n";
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const ScheduledGate& g : sched.gates) {
    out << to_string(g.gate.kind) << ",";
    out << g.gate.q0;
    if (g.gate.q1 >= 0) out << ";" << g.gate.q1;
    out << "," << fmt(g.start_ns) << "," << fmt(g.duration_ns) << "\n";
  }
}

}  // namespace knapq
