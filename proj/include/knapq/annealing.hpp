#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "knapq/bits.hpp"
#include "knapq/distribution.hpp"
#include "knapq/exact.hpp"
#include "knapq/qubo.hpp"
#include "knapq/report.hpp"
#include "knapq/rng.hpp"

namespace knapq {

struct AnnealConfig {
  int num_reads = 1000;
  int sweeps_per_read = 1000;
  // geometric schedule; <= 0 means derive from the coefficient scale:
  // beta_min = 0.1 / mean|coeff|, beta_max = 10 / min nonzero |coeff|
  double beta_min = 0.0;
  double beta_max = 0.0;
  std::uint64_t seed = 1;
};

inline void resolve_beta_schedule(const QuadraticForm& q, double& beta_min, double& beta_max) {
  if (beta_min > 0.0 && beta_max > 0.0) {
    if (beta_min >= beta_max)
      throw std::invalid_argument("beta_min must be smaller than beta_max");
    return;
  }
  double sum = 0.0, min_abs = 0.0;
  long long count = 0;
  auto feed = [&](double c) {
    const double a = std::abs(c);
    if (a == 0.0) return;
    sum += a;
    min_abs = (count == 0) ? a : std::min(min_abs, a);
    ++count;
  };
  for (double c : q.linear) feed(c);
  for (const auto& [pq, c] : q.quadratic) {
    (void)pq;
    feed(c);
  }
  if (count == 0) {  // constant model, any schedule works
    beta_min = 0.1;
    beta_max = 10.0;
    return;
  }
  if (beta_min <= 0.0) beta_min = 0.1 / (sum / static_cast<double>(count));
  if (beta_max <= 0.0) beta_max = 10.0 / min_abs;
  if (beta_min >= beta_max) beta_min = beta_max / 100.0;
}

// Single-bit-flip Metropolis annealer. Each read is an independent restart
// with its own derived seed; the final sweep's configuration is recorded.
inline SampleDistribution simulated_annealing(const QuadraticForm& q,
                                              const AnnealConfig& cfg) {
  if (cfg.num_reads < 1 || cfg.sweeps_per_read < 1)
    throw std::invalid_argument("annealing needs at least one read and one sweep");
  double beta_min = cfg.beta_min, beta_max = cfg.beta_max;
  resolve_beta_schedule(q, beta_min, beta_max);
  const double ratio = beta_max / beta_min;
  const int sweeps = cfg.sweeps_per_read;

  SampleDistribution dist;
  Bits x(static_cast<std::size_t>(q.num_vars));
  for (int read = 0; read < cfg.num_reads; ++read) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(read)));
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      const double beta =
          sweeps == 1 ? beta_max
                      : beta_min * std::pow(ratio, static_cast<double>(sweep) /
                                                       static_cast<double>(sweeps - 1));
      for (int p = 0; p < q.num_vars; ++p) {
        const double d = q.flip_delta(x, p);
        if (d <= 0.0 || rng.uniform() < std::exp(-beta * d))
          x[static_cast<std::size_t>(p)] ^= 1u;
      }
    }
    dist.add(to_bitstring(x));
  }
  return dist;
}

// energy(x with bit flipped) - energy(x), exposed for callers that keep
// their own Metropolis loops.
inline double incremental_delta(const QuadraticForm& q, const Bits& x, int flip_index) {
  q.check_length(x);
  return q.flip_delta(x, flip_index);
}

// Restriction of a quadratic form to `keep`, with every clamped variable
// folded into the linear terms and offset. Energies agree exactly:
// sub.energy(y) == full.energy(splice of y into clamped).
inline QuadraticForm fold_subproblem(const QuadraticForm& q, const std::vector<int>& keep,
                                     const Bits& clamped) {
  q.check_length(clamped);
  std::vector<int> position(static_cast<std::size_t>(q.num_vars), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const int v = keep[i];
    if (v < 0 || v >= q.num_vars) throw std::invalid_argument("kept variable out of range");
    if (position[static_cast<std::size_t>(v)] != -1)
      throw std::invalid_argument("kept variables must be distinct");
    position[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }

  QuadraticForm sub;
  sub.num_vars = static_cast<int>(keep.size());
  sub.linear.assign(keep.size(), 0.0);
  sub.offset = q.offset;
  for (int p = 0; p < q.num_vars; ++p) {
    const double c = q.linear[static_cast<std::size_t>(p)];
    if (c == 0.0) continue;
    const int np = position[static_cast<std::size_t>(p)];
    if (np >= 0)
      sub.linear[static_cast<std::size_t>(np)] += c;
    else if (clamped[static_cast<std::size_t>(p)])
      sub.offset += c;
  }
  for (const auto& [pq, c] : q.quadratic) {
    const int np = position[static_cast<std::size_t>(pq.first)];
    const int nq = position[static_cast<std::size_t>(pq.second)];
    if (np >= 0 && nq >= 0) {
      sub.add_quadratic(np, nq, c);
    } else if (np >= 0) {
      if (clamped[static_cast<std::size_t>(pq.second)]) sub.linear[static_cast<std::size_t>(np)] += c;
    } else if (nq >= 0) {
      if (clamped[static_cast<std::size_t>(pq.first)]) sub.linear[static_cast<std::size_t>(nq)] += c;
    } else if (clamped[static_cast<std::size_t>(pq.first)] &&
               clamped[static_cast<std::size_t>(pq.second)]) {
      sub.offset += c;
    }
  }
  sub.finalize();
  return sub;
}

struct IhsConfig {
  int subproblem_size = 12;  // k
  int max_iterations = 50;
  int stall_limit = 10;
  enum class Inner { Sa, BruteForce } inner_solver = Inner::Sa;
  int inner_reads = 100;
  int inner_sweeps = 256;
};

// Iterative heuristic solver: fix all but k randomly chosen variables,
// minimize the induced sub-QUBO, splice the result back, and keep it on
// strict improvement. Once stall_limit consecutive iterations bring no
// improvement the walk is considered converged and restarts from a fresh
// random configuration; the iteration budget is shared across restarts and
// the best configuration seen anywhere is returned. With k much smaller
// than the variable count a single walk often cannot reach the optimum
// from its local basin (too few subsets contain the needed variables), so
// the restarts buy far more than extra stalled iterations would.
inline RunReport ihs(const QuboModel& model, const IhsConfig& cfg, std::uint64_t seed) {
  if (cfg.subproblem_size < 1 || cfg.subproblem_size > model.num_vars)
    throw std::invalid_argument("subproblem size must be in 1..num_vars");
  if (cfg.max_iterations < 1) throw std::invalid_argument("need at least one iteration");
  if (cfg.stall_limit < 1) throw std::invalid_argument("stall limit must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng(derive_seed(seed, 0x1145));
  Bits x(static_cast<std::size_t>(model.num_vars));
  auto randomize = [&] {
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
  };
  randomize();
  double e = model.energy(x);
  Bits best_x = x;
  double best_e = e;

  RunReport report;
  report.solver_id = "ihs";
  report.energy_trace.push_back(best_e);

  std::vector<int> indices(static_cast<std::size_t>(model.num_vars));
  for (int i = 0; i < model.num_vars; ++i) indices[static_cast<std::size_t>(i)] = i;
  const int k = cfg.subproblem_size;

  int stall = 0;
  int iterations = 0;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    if (stall >= cfg.stall_limit) {
      randomize();
      e = model.energy(x);
      stall = 0;
    }
    ++iterations;
    // partial Fisher-Yates draw of k distinct variables
    for (int i = 0; i < k; ++i)
      std::swap(indices[static_cast<std::size_t>(i)],
                indices[static_cast<std::size_t>(i + rng.uniform_index(model.num_vars - i))]);
    std::vector<int> chosen(indices.begin(), indices.begin() + k);
    std::sort(chosen.begin(), chosen.end());

    const QuadraticForm sub = fold_subproblem(model, chosen, x);
    Bits sub_best;
    if (cfg.inner_solver == IhsConfig::Inner::BruteForce) {
      sub_best = bits_from_string(brute_force_qubo(sub).best_bitstring);
    } else {
      AnnealConfig inner;
      inner.num_reads = cfg.inner_reads;
      inner.sweeps_per_read = cfg.inner_sweeps;
      inner.seed = derive_seed(seed, 0x54a, static_cast<std::uint64_t>(iter));
      const SampleDistribution d = simulated_annealing(sub, inner);
      double inner_best = 0.0;
      for (const auto& [key, count] : d.counts) {
        (void)count;
        const Bits cand = bits_from_string(key);
        const double ce = sub.energy(cand);
        if (sub_best.empty() || ce < inner_best) {
          sub_best = cand;
          inner_best = ce;
        }
      }
    }

    Bits candidate = x;
    for (std::size_t i = 0; i < chosen.size(); ++i)
      candidate[static_cast<std::size_t>(chosen[i])] = sub_best[i];
    const double ce = model.energy(candidate);
    if (ce < e) {
      x = std::move(candidate);
      e = ce;
      stall = 0;
    } else {
      ++stall;
    }
    if (e < best_e) {
      best_e = e;
      best_x = x;
    }
    report.energy_trace.push_back(best_e);
  }

  report.best_bitstring = to_bitstring(best_x);
  report.best_energy = best_e;
  const PenaltyBreakdown pb = penalty_breakdown(model, best_x);
  report.valid = pb.single == 0 && pb.capacity == 0;
  report.best_value = total_value(model, best_x);
  report.n_iter = iterations;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace knapq
