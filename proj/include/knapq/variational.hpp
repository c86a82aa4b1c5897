#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "knapq/distribution.hpp"
#include "knapq/optimizers.hpp"
#include "knapq/qubo.hpp"
#include "knapq/rng.hpp"
#include "knapq/statevector.hpp"

namespace knapq {

enum class AnsatzKind { Qaoa, WsQaoa, WsInitQaoa, Vqe };

inline const char* to_string(AnsatzKind k) {
  switch (k) {
    case AnsatzKind::Qaoa: return "qaoa";
    case AnsatzKind::WsQaoa: return "ws_qaoa";
    case AnsatzKind::WsInitQaoa: return "ws_init_qaoa";
    case AnsatzKind::Vqe: return "vqe";
  }
  return "?";
}

inline AnsatzKind ansatz_kind_from_string(const std::string& s) {
  if (s == "qaoa") return AnsatzKind::Qaoa;
  if (s == "ws_qaoa") return AnsatzKind::WsQaoa;
  if (s == "ws_init_qaoa") return AnsatzKind::WsInitQaoa;
  if (s == "vqe") return AnsatzKind::Vqe;
  throw std::invalid_argument("unknown ansatz kind '" + s + "'");
}

struct AnsatzSpec {
  AnsatzKind kind = AnsatzKind::Qaoa;
  int layers = 1;  // p
  int num_qubits = 0;
  std::vector<double> c_star;  // required for the warm-start kinds
};

inline bool is_warm_start(AnsatzKind k) {
  return k == AnsatzKind::WsQaoa || k == AnsatzKind::WsInitQaoa;
}

inline void validate_spec(const AnsatzSpec& spec) {
  if (spec.layers < 1) throw std::invalid_argument("layer count must be >= 1");
  check_qubit_count(spec.num_qubits);
  if (is_warm_start(spec.kind)) {
    if (static_cast<int>(spec.c_star.size()) != spec.num_qubits)
      throw std::invalid_argument(
          "warm-start ansatz needs a relaxation vector of one entry per qubit");
    for (double c : spec.c_star)
      if (!(c > 0.0 && c < 1.0))
        throw std::invalid_argument("warm-start values must lie strictly inside (0,1)");
  }
}

inline int parameter_count(const AnsatzSpec& spec) {
  return spec.kind == AnsatzKind::Vqe ? spec.num_qubits * (spec.layers + 1)
                                      : 2 * spec.layers;
}

// Alternating-layer state: phase separator, then mixer, layer 1 first. The
// warm-start kinds start from the relaxation product state; WsQaoa also
// swaps the transverse-field mixer for the warm-start mixer.
inline StateVector build_qaoa_state(const DiagonalHamiltonian& h, const AnsatzSpec& spec,
                                    std::span<const double> gammas,
                                    std::span<const double> betas) {
  validate_spec(spec);
  if (spec.kind == AnsatzKind::Vqe)
    throw std::invalid_argument("VQE states are built by build_vqe_state");
  if (static_cast<int>(gammas.size()) != spec.layers ||
      static_cast<int>(betas.size()) != spec.layers)
    throw std::invalid_argument("need one gamma and one beta per layer");
  if (h.num_qubits != spec.num_qubits)
    throw std::invalid_argument("Hamiltonian qubit count does not match the ansatz");

  StateVector s = is_warm_start(spec.kind) ? warm_start_state(spec.c_star)
                                           : uniform_state(spec.num_qubits);
  for (int l = 0; l < spec.layers; ++l) {
    apply_phase(s, h, gammas[static_cast<std::size_t>(l)]);
    if (spec.kind == AnsatzKind::WsQaoa)
      apply_ws_mixer(s, spec.c_star, betas[static_cast<std::size_t>(l)]);
    else
      apply_x_mixer(s, betas[static_cast<std::size_t>(l)]);
  }
  return s;
}

// Hardware-efficient ansatz: p repetitions of [R_Y layer, CX chain
// 0->1->...->n-1], then a final R_Y layer. n*(p+1) angles, layer-major.
inline StateVector build_vqe_state(const AnsatzSpec& spec, std::span<const double> thetas) {
  validate_spec(spec);
  if (spec.kind != AnsatzKind::Vqe)
    throw std::invalid_argument("build_vqe_state needs a VQE spec");
  if (static_cast<int>(thetas.size()) != parameter_count(spec))
    throw std::invalid_argument("VQE needs num_qubits*(layers+1) angles, got " +
                                std::to_string(thetas.size()));
  const int n = spec.num_qubits;
  StateVector s = basis_state(n, 0);
  std::size_t t = 0;
  for (int l = 0; l < spec.layers; ++l) {
    for (int q = 0; q < n; ++q) apply_ry(s, q, thetas[t++]);
    for (int q = 0; q + 1 < n; ++q) apply_cx(s, q, q + 1);
  }
  for (int q = 0; q < n; ++q) apply_ry(s, q, thetas[t++]);
  return s;
}

inline StateVector build_ansatz_state(const DiagonalHamiltonian& h, const AnsatzSpec& spec,
                                      std::span<const double> params) {
  if (spec.kind == AnsatzKind::Vqe) return build_vqe_state(spec, params);
  const std::size_t p = static_cast<std::size_t>(spec.layers);
  if (params.size() != 2 * p)
    throw std::invalid_argument("QAOA-family ansatz needs 2*layers parameters");
  return build_qaoa_state(h, spec, params.subspan(0, p), params.subspan(p, p));
}

struct OptimizerConfig {
  std::string method = "nelder_mead";
  int max_iter = 10000;
  double tolerance = 1e-6;
  double initial_step = 0.5;
  long long shots = 0;  // 0 = exact statevector expectation as the objective
};

// Classical outer loop. Initial angles are uniform in [-pi, pi] for the
// QAOA family and [0, 2pi] for VQE. The default objective is the exact
// expectation, which keeps runs deterministic; set shots > 0 to optimize on
// sampled energies instead.
inline OptimizationTrace optimize(const QuboModel& model, const AnsatzSpec& spec,
                                  const OptimizerConfig& cfg, std::uint64_t seed) {
  validate_spec(spec);
  if (spec.num_qubits != model.num_vars)
    throw std::invalid_argument("ansatz qubit count does not match the model");
  const DiagonalHamiltonian h = diagonal_hamiltonian(model);

  Rng rng(derive_seed(seed, 0x1717));
  std::vector<double> x0(static_cast<std::size_t>(parameter_count(spec)));
  for (auto& v : x0)
    v = spec.kind == AnsatzKind::Vqe ? rng.uniform(0.0, 2.0 * std::numbers::pi)
                                     : rng.uniform(-std::numbers::pi, std::numbers::pi);

  long long eval_counter = 0;
  Objective objective = [&](const std::vector<double>& params) {
    const StateVector s = build_ansatz_state(h, spec, params);
    if (cfg.shots <= 0) return expectation(s, h);
    const SampleDistribution d =
        sample(s, cfg.shots, derive_seed(seed, 0x0b5, static_cast<std::uint64_t>(++eval_counter)));
    double mean = 0.0;
    for (const auto& [key, count] : d.counts)
      mean += static_cast<double>(count) * model.energy(bits_from_string(key));
    return mean / static_cast<double>(d.total_shots);
  };

  OptimizeOptions opt;
  opt.max_iter = cfg.max_iter;
  opt.tolerance = cfg.tolerance;
  opt.initial_step = cfg.initial_step;
  return minimize(cfg.method, objective, std::move(x0), opt);
}

// Optimize, rebuild the state at the best parameters, and sample it.
inline std::pair<SampleDistribution, OptimizationTrace> run_variational(
    const QuboModel& model, const AnsatzSpec& spec, const OptimizerConfig& cfg,
    long long n_samp, std::uint64_t seed) {
  OptimizationTrace trace = optimize(model, spec, cfg, seed);
  const DiagonalHamiltonian h = diagonal_hamiltonian(model);
  const StateVector s = build_ansatz_state(h, spec, trace.best_params);
  SampleDistribution dist = sample(s, n_samp, derive_seed(seed, 0x5a3));
  return {std::move(dist), std::move(trace)};
}

}  // namespace knapq
