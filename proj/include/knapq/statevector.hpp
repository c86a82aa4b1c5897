#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "knapq/bits.hpp"
#include "knapq/distribution.hpp"
#include "knapq/qubo.hpp"
#include "knapq/rng.hpp"

namespace knapq {

// Dense statevector engine for up to 26 qubits.
//
// Conventions, fixed once for the whole codebase:
//   R_Y(theta) = exp(-i*theta*Y/2),  R_Z(phi) = exp(-i*phi*Z/2)
//   the transverse-field mixer applies exp(-i*beta*X) per qubit -- note the
//   missing /2 relative to R_X(beta); the two are easy to mix up
//   qubit 0 is the least significant bit of a basis index and the leftmost
//   character of a rendered bitstring
using cplx = std::complex<double>;

struct StateVector {
  int num_qubits = 0;
  std::vector<cplx> amps;
};

inline void check_qubit_count(int n) {
  if (n < 1 || n > 26)
    throw std::invalid_argument("qubit count must be in 1..26, got " + std::to_string(n));
}

inline StateVector uniform_state(int n) {
  check_qubit_count(n);
  StateVector s{n, {}};
  const std::size_t dim = std::size_t{1} << n;
  s.amps.assign(dim, cplx{std::pow(2.0, -0.5 * n), 0.0});
  return s;
}

inline StateVector basis_state(int n, std::uint64_t k) {
  check_qubit_count(n);
  StateVector s{n, {}};
  s.amps.assign(std::size_t{1} << n, cplx{0.0, 0.0});
  s.amps[k] = 1.0;
  return s;
}

// Product state with P(qubit l = 1) exactly c_star[l].
inline StateVector warm_start_state(const std::vector<double>& c_star) {
  const int n = static_cast<int>(c_star.size());
  check_qubit_count(n);
  for (double c : c_star)
    if (!(c > 0.0 && c < 1.0))
      throw std::invalid_argument("warm-start values must lie strictly inside (0,1)");
  StateVector s = basis_state(n, 0);
  const std::size_t dim = s.amps.size();
  for (std::size_t k = 0; k < dim; ++k) {
    double a = 1.0;
    for (int l = 0; l < n; ++l)
      a *= ((k >> l) & 1u) ? std::sqrt(c_star[static_cast<std::size_t>(l)])
                           : std::sqrt(1.0 - c_star[static_cast<std::size_t>(l)]);
    s.amps[k] = a;
  }
  return s;
}

// Diagonal problem Hamiltonian: per-basis-state QUBO energies, tabulated
// when the table fits comfortably and evaluated on the fly otherwise.
struct DiagonalHamiltonian {
  int num_qubits = 0;
  std::vector<double> table;
  std::function<double(std::uint64_t)> eval;

  double energy(std::uint64_t k) const { return table.empty() ? eval(k) : table[k]; }
};

inline DiagonalHamiltonian diagonal_hamiltonian(const QuadraticForm& q,
                                                int table_max_qubits = 22) {
  check_qubit_count(q.num_vars);
  DiagonalHamiltonian h;
  h.num_qubits = q.num_vars;
  const int n = q.num_vars;
  if (n <= table_max_qubits) {
    const std::size_t dim = std::size_t{1} << n;
    h.table.assign(dim, q.offset);
    for (int p = 0; p < n; ++p) {
      const double c = q.linear[static_cast<std::size_t>(p)];
      if (c == 0.0) continue;
      const std::uint64_t bit = std::uint64_t{1} << p;
      for (std::size_t k = 0; k < dim; ++k)
        if (k & bit) h.table[k] += c;
    }
    for (const auto& [pq, c] : q.quadratic) {
      const std::uint64_t mask =
          (std::uint64_t{1} << pq.first) | (std::uint64_t{1} << pq.second);
      for (std::size_t k = 0; k < dim; ++k)
        if ((k & mask) == mask) h.table[k] += c;
    }
  } else {
    h.eval = [q, n](std::uint64_t k) { return q.energy(bits_from_index(k, n)); };
  }
  return h;
}

namespace detail {

inline void apply_1q(StateVector& s, int qubit, cplx m00, cplx m01, cplx m10, cplx m11) {
  if (qubit < 0 || qubit >= s.num_qubits)
    throw std::invalid_argument("qubit index out of range");
  const std::size_t stride = std::size_t{1} << qubit;
  const std::size_t dim = s.amps.size();
  for (std::size_t base = 0; base < dim; base += stride << 1) {
    for (std::size_t off = 0; off < stride; ++off) {
      const std::size_t i0 = base + off;
      const std::size_t i1 = i0 + stride;
      const cplx a0 = s.amps[i0];
      const cplx a1 = s.amps[i1];
      s.amps[i0] = m00 * a0 + m01 * a1;
      s.amps[i1] = m10 * a0 + m11 * a1;
    }
  }
}

}  // namespace detail

inline void apply_ry(StateVector& s, int qubit, double theta) {
  const double c = std::cos(0.5 * theta), n = std::sin(0.5 * theta);
  detail::apply_1q(s, qubit, c, -n, n, c);
}

inline void apply_rz(StateVector& s, int qubit, double phi) {
  detail::apply_1q(s, qubit, std::polar(1.0, -0.5 * phi), 0.0, 0.0,
                   std::polar(1.0, 0.5 * phi));
}

inline void apply_cx(StateVector& s, int control, int target) {
  if (control < 0 || control >= s.num_qubits || target < 0 || target >= s.num_qubits)
    throw std::invalid_argument("qubit index out of range");
  if (control == target) throw std::invalid_argument("CX needs distinct qubits");
  const std::uint64_t cbit = std::uint64_t{1} << control;
  const std::uint64_t tbit = std::uint64_t{1} << target;
  const std::size_t dim = s.amps.size();
  for (std::size_t k = 0; k < dim; ++k)
    if ((k & cbit) && !(k & tbit)) std::swap(s.amps[k], s.amps[k | tbit]);
}

// amp_k <- exp(-i*gamma*E_k) * amp_k
inline void apply_phase(StateVector& s, const DiagonalHamiltonian& h, double gamma) {
  if (h.num_qubits != s.num_qubits)
    throw std::invalid_argument("Hamiltonian and state qubit counts differ");
  const std::size_t dim = s.amps.size();
  for (std::size_t k = 0; k < dim; ++k)
    s.amps[k] *= std::polar(1.0, -gamma * h.energy(k));
}

// exp(-i*beta*X) on every qubit
inline void apply_x_mixer(StateVector& s, double beta) {
  const cplx c{std::cos(beta), 0.0};
  const cplx ims{0.0, -std::sin(beta)};
  for (int q = 0; q < s.num_qubits; ++q) detail::apply_1q(s, q, c, ims, ims, c);
}

// Warm-start mixer: per qubit R_Y(theta_l) R_Z(-2*beta) R_Y(-theta_l) with
// theta_l = 2*arcsin(sqrt(c_l)). This equals exp(-i*beta*H_l) for the
// traceless reflection H_l whose -1 eigenvector is the warm-start
// single-qubit state, so the warm-start state only picks up a global phase.
inline void apply_ws_mixer(StateVector& s, const std::vector<double>& c_star, double beta) {
  if (static_cast<int>(c_star.size()) != s.num_qubits)
    throw std::invalid_argument("warm-start vector length does not match qubit count");
  for (double c : c_star)
    if (!(c > 0.0 && c < 1.0))
      throw std::invalid_argument("warm-start values must lie strictly inside (0,1)");
  const cplx eip = std::polar(1.0, beta);
  const cplx eim = std::polar(1.0, -beta);
  for (int q = 0; q < s.num_qubits; ++q) {
    const double theta = 2.0 * std::asin(std::sqrt(c_star[static_cast<std::size_t>(q)]));
    const double ct = std::cos(0.5 * theta), st = std::sin(0.5 * theta);
    const cplx off = cplx{0.0, 2.0 * ct * st * std::sin(beta)};
    detail::apply_1q(s, q, ct * ct * eip + st * st * eim, off, off,
                     st * st * eip + ct * ct * eim);
  }
}

inline double norm_squared(const StateVector& s) {
  double n = 0.0;
  for (const cplx& a : s.amps) n += std::norm(a);
  return n;
}

// <state| H |state>, exact (no sampling noise)
inline double expectation(const StateVector& s, const DiagonalHamiltonian& h) {
  if (h.num_qubits != s.num_qubits)
    throw std::invalid_argument("Hamiltonian and state qubit counts differ");
  double e = 0.0;
  const std::size_t dim = s.amps.size();
  for (std::size_t k = 0; k < dim; ++k) e += std::norm(s.amps[k]) * h.energy(k);
  return e;
}

// Multinomial draw of n_samp shots from |amp|^2, deterministic per seed.
inline SampleDistribution sample(const StateVector& s, long long n_samp, std::uint64_t seed) {
  if (n_samp < 1) throw std::invalid_argument("shot count must be >= 1");
  Rng rng(seed);
  std::vector<double> draws(static_cast<std::size_t>(n_samp));
  for (auto& d : draws) d = rng.uniform();
  std::sort(draws.begin(), draws.end());

  SampleDistribution dist;
  const std::size_t dim = s.amps.size();
  double cum = 0.0;
  std::size_t di = 0;
  for (std::size_t k = 0; k < dim && di < draws.size(); ++k) {
    const double p = std::norm(s.amps[k]);
    if (p == 0.0) continue;
    cum += p;
    long long c = 0;
    while (di < draws.size() && draws[di] < cum) {
      ++c;
      ++di;
    }
    if (c > 0) dist.add(to_bitstring(bits_from_index(k, s.num_qubits)), c);
  }
  if (di < draws.size()) {
    // leftover mass from rounding goes to the last populated outcome
    for (std::size_t k = dim; k-- > 0;) {
      if (std::norm(s.amps[k]) > 0.0) {
        dist.add(to_bitstring(bits_from_index(k, s.num_qubits)),
                 static_cast<long long>(draws.size() - di));
        break;
      }
    }
  }
  return dist;
}

// Exact outcome probabilities rendered like a shot histogram (zeros dropped).
inline std::map<std::string, double> exact_distribution(const StateVector& s) {
  std::map<std::string, double> probs;
  const std::size_t dim = s.amps.size();
  for (std::size_t k = 0; k < dim; ++k) {
    const double p = std::norm(s.amps[k]);
    if (p > 0.0) probs[to_bitstring(bits_from_index(k, s.num_qubits))] = p;
  }
  return probs;
}

}  // namespace knapq
