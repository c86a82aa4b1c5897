#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "knapq/qubo.hpp"
#include "knapq/variational.hpp"

namespace knapq {

// Gate-level circuit IR, used by the hardware model. Angle conventions match
// the statevector engine; Zz(q0,q1,angle) means exp(-i*angle/2 * Z(x)Z).
enum class GateKind { H, X, Rx, Ry, Rz, Cx, Zz };

struct Gate {
  GateKind kind;
  int q0 = 0;
  int q1 = -1;
  double angle = 0.0;
};

struct Circuit {
  int num_qubits = 0;
  std::vector<Gate> gates;
};

// Pauli-Z expansion of a binary quadratic form via x = (1 - Z)/2. The
// constant part only shifts the global phase and is dropped.
struct IsingView {
  std::vector<double> z;                                  // per-variable Z coefficient
  std::vector<std::pair<std::pair<int, int>, double>> zz; // upper-triangular ZZ coefficients
};

inline IsingView ising_view(const QuadraticForm& q) {
  IsingView v;
  v.z.assign(static_cast<std::size_t>(q.num_vars), 0.0);
  for (int p = 0; p < q.num_vars; ++p)
    v.z[static_cast<std::size_t>(p)] = -0.5 * q.linear[static_cast<std::size_t>(p)];
  for (const auto& [pq, c] : q.quadratic) {
    v.z[static_cast<std::size_t>(pq.first)] -= 0.25 * c;
    v.z[static_cast<std::size_t>(pq.second)] -= 0.25 * c;
    v.zz.push_back({pq, 0.25 * c});
  }
  return v;
}

// Phase separator exp(-i*gamma*H) as one Rz per nonzero Z term and one ZZ
// interaction per coupling.
inline void append_phase_separator(Circuit& c, const IsingView& v, double gamma) {
  for (std::size_t p = 0; p < v.z.size(); ++p)
    if (v.z[p] != 0.0) c.gates.push_back({GateKind::Rz, static_cast<int>(p), -1, 2.0 * gamma * v.z[p]});
  for (const auto& [pq, w] : v.zz)
    c.gates.push_back({GateKind::Zz, pq.first, pq.second, 2.0 * gamma * w});
}

// Gate-level equivalent of build_qaoa_state, up to global phase.
inline Circuit qaoa_circuit(const QuboModel& model, const AnsatzSpec& spec,
                            std::span<const double> gammas, std::span<const double> betas) {
  validate_spec(spec);
  if (spec.kind == AnsatzKind::Vqe)
    throw std::invalid_argument("VQE circuits are built by vqe_circuit");
  if (static_cast<int>(gammas.size()) != spec.layers ||
      static_cast<int>(betas.size()) != spec.layers)
    throw std::invalid_argument("need one gamma and one beta per layer");
  if (spec.num_qubits != model.num_vars)
    throw std::invalid_argument("ansatz qubit count does not match the model");

  Circuit c;
  c.num_qubits = spec.num_qubits;
  const IsingView v = ising_view(model);

  if (is_warm_start(spec.kind)) {
    for (int q = 0; q < c.num_qubits; ++q)
      c.gates.push_back({GateKind::Ry, q, -1,
                         2.0 * std::asin(std::sqrt(spec.c_star[static_cast<std::size_t>(q)]))});
  } else {
    for (int q = 0; q < c.num_qubits; ++q) c.gates.push_back({GateKind::H, q, -1, 0.0});
  }

  for (int l = 0; l < spec.layers; ++l) {
    append_phase_separator(c, v, gammas[static_cast<std::size_t>(l)]);
    const double beta = betas[static_cast<std::size_t>(l)];
    if (spec.kind == AnsatzKind::WsQaoa) {
      for (int q = 0; q < c.num_qubits; ++q) {
        const double theta =
            2.0 * std::asin(std::sqrt(spec.c_star[static_cast<std::size_t>(q)]));
        c.gates.push_back({GateKind::Ry, q, -1, -theta});
        c.gates.push_back({GateKind::Rz, q, -1, -2.0 * beta});
        c.gates.push_back({GateKind::Ry, q, -1, theta});
      }
    } else {
      for (int q = 0; q < c.num_qubits; ++q)
        c.gates.push_back({GateKind::Rx, q, -1, 2.0 * beta});
    }
  }
  return c;
}

// Gate-level equivalent of build_vqe_state.
inline Circuit vqe_circuit(const AnsatzSpec& spec, std::span<const double> thetas) {
  validate_spec(spec);
  if (spec.kind != AnsatzKind::Vqe) throw std::invalid_argument("vqe_circuit needs a VQE spec");
  if (static_cast<int>(thetas.size()) != parameter_count(spec))
    throw std::invalid_argument("VQE needs num_qubits*(layers+1) angles");
  Circuit c;
  c.num_qubits = spec.num_qubits;
  std::size_t t = 0;
  for (int l = 0; l < spec.layers; ++l) {
    for (int q = 0; q < c.num_qubits; ++q)
      c.gates.push_back({GateKind::Ry, q, -1, thetas[t++]});
    for (int q = 0; q + 1 < c.num_qubits; ++q)
      c.gates.push_back({GateKind::Cx, q, q + 1, 0.0});
  }
  for (int q = 0; q < c.num_qubits; ++q)
    c.gates.push_back({GateKind::Ry, q, -1, thetas[t++]});
  return c;
}

}  // namespace knapq
