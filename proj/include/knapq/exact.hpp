#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "knapq/bits.hpp"
#include "knapq/qubo.hpp"

namespace knapq {

struct ExactResult {
  std::string best_bitstring;
  double best_energy = 0.0;
  long long optimal_value = 0;  // packed value of the reported assignment
  long long enumerated_count = 0;
};

// Exhaustive QUBO minimization in Gray-code order, one incremental delta per
// visited point. Ties go to the lexicographically smallest bitstring.
inline ExactResult brute_force_qubo(const QuadraticForm& q) {
  if (q.num_vars > 26)
    throw std::invalid_argument("brute force limited to 26 variables, got " +
                                std::to_string(q.num_vars));
  Bits x(static_cast<std::size_t>(q.num_vars), 0);
  double e = q.offset;
  Bits best = x;
  double best_e = e;
  const std::uint64_t total = std::uint64_t{1} << q.num_vars;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int flip = std::countr_zero(k);
    e += q.flip_delta(x, flip);
    x[static_cast<std::size_t>(flip)] ^= 1u;
    if (e < best_e || (e == best_e && std::lexicographical_compare(
                                          x.begin(), x.end(), best.begin(), best.end()))) {
      best_e = e;
      best = x;
    }
  }
  ExactResult res;
  res.best_bitstring = to_bitstring(best);
  res.best_energy = best_e;
  res.enumerated_count = static_cast<long long>(total);
  return res;
}

inline ExactResult brute_force_qubo(const QuboModel& m) {
  ExactResult res = brute_force_qubo(static_cast<const QuadraticForm&>(m));
  const Bits best = bits_from_string(res.best_bitstring);
  const PenaltyBreakdown pb = penalty_breakdown(m, best);
  if (pb.single == 0 && pb.capacity == 0) res.optimal_value = total_value(m, best);
  return res;
}

namespace detail {

// Upper bound for a partial assignment: packed value so far plus a
// fractional fill of the *pooled* remaining capacity with each remaining
// item's best value. Pooling and fractional packing both enlarge the
// feasible set, so this never undercuts a completion.
inline double bb_fractional_bound(const KnapsackInstance& inst,
                                  const std::vector<int>& density_order, int next_item,
                                  long long value_so_far, long long pooled_remaining,
                                  const std::vector<long long>& best_value) {
  double bound = static_cast<double>(value_so_far);
  double pool = static_cast<double>(pooled_remaining);
  for (int j : density_order) {
    if (j < next_item) continue;
    const long long w = inst.weights[static_cast<std::size_t>(j)];
    const long long v = best_value[static_cast<std::size_t>(j)];
    if (v == 0) continue;
    if (w == 0) {
      bound += static_cast<double>(v);
    } else if (pool >= static_cast<double>(w)) {
      bound += static_cast<double>(v);
      pool -= static_cast<double>(w);
    } else {
      bound += static_cast<double>(v) * pool / static_cast<double>(w);
      break;
    }
  }
  return bound;
}

}  // namespace detail

// Depth-first 0/1 multi-knapsack search over per-item assignments
// (none, knapsack 0, ..., knapsack M-1) in that order, with incumbent
// pruning by the fractional bound above. Exploring choices in assignment
// order and accepting strict improvements only makes the reported optimum
// the lexicographically smallest one.
inline ExactResult branch_and_bound(const KnapsackInstance& inst) {
  validate_instance(inst);
  if (inst.num_items * inst.num_knapsacks > 30)
    throw std::invalid_argument("branch and bound limited to N*M <= 30");

  const int n = inst.num_items;
  const int mk = inst.num_knapsacks;
  std::vector<long long> best_value(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < mk; ++i)
      best_value[static_cast<std::size_t>(j)] =
          std::max(best_value[static_cast<std::size_t>(j)],
                   inst.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);

  std::vector<int> density_order(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) density_order[static_cast<std::size_t>(j)] = j;
  std::sort(density_order.begin(), density_order.end(), [&](int a, int b) {
    const long long wa = inst.weights[static_cast<std::size_t>(a)];
    const long long wb = inst.weights[static_cast<std::size_t>(b)];
    const long long va = best_value[static_cast<std::size_t>(a)];
    const long long vb = best_value[static_cast<std::size_t>(b)];
    if ((wa == 0) != (wb == 0)) return wa == 0;  // free items first
    const long long lhs = va * wb, rhs = vb * wa;
    if (lhs != rhs) return lhs > rhs;  // density descending
    return a < b;
  });

  std::vector<long long> remaining = inst.capacities;
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  std::vector<int> best_assignment;
  long long incumbent = -1;
  long long visited = 0;
  long long pooled = 0;
  for (long long c : inst.capacities) pooled += c;

  auto dfs = [&](auto&& self, int item, long long value) -> void {
    ++visited;
    if (item == n) {
      if (value > incumbent) {
        incumbent = value;
        best_assignment = assignment;
      }
      return;
    }
    if (detail::bb_fractional_bound(inst, density_order, item, value, pooled, best_value) <=
        static_cast<double>(incumbent))
      return;
    // leave item out
    assignment[static_cast<std::size_t>(item)] = -1;
    self(self, item + 1, value);
    // or place it in each knapsack that still has room
    const long long w = inst.weights[static_cast<std::size_t>(item)];
    for (int i = 0; i < mk; ++i) {
      if (remaining[static_cast<std::size_t>(i)] < w) continue;
      remaining[static_cast<std::size_t>(i)] -= w;
      pooled -= w;
      assignment[static_cast<std::size_t>(item)] = i;
      self(self, item + 1,
           value + inst.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(item)]);
      assignment[static_cast<std::size_t>(item)] = -1;
      remaining[static_cast<std::size_t>(i)] += w;
      pooled += w;
    }
  };
  dfs(dfs, 0, 0);

  // encode the winning assignment, slack bits set to the exact leftover
  const QubitLayout lay = make_layout(inst);
  Bits bits(static_cast<std::size_t>(lay.total_qubits), 0);
  std::vector<long long> load(static_cast<std::size_t>(mk), 0);
  for (int j = 0; j < n; ++j) {
    const int i = best_assignment[static_cast<std::size_t>(j)];
    if (i < 0) continue;
    bits[static_cast<std::size_t>(lay.decision_index(i, j))] = 1;
    load[static_cast<std::size_t>(i)] += inst.weights[static_cast<std::size_t>(j)];
  }
  for (int i = 0; i < mk; ++i) {
    const long long slack = inst.capacities[static_cast<std::size_t>(i)] - load[static_cast<std::size_t>(i)];
    for (int b = 0; b < lay.slack_counts[static_cast<std::size_t>(i)]; ++b)
      bits[static_cast<std::size_t>(lay.slack_index(i, b))] =
          static_cast<std::uint8_t>((slack >> b) & 1);
  }

  ExactResult res;
  res.best_bitstring = to_bitstring(bits);
  res.best_energy = -static_cast<double>(incumbent);  // objective part only
  res.optimal_value = incumbent;
  res.enumerated_count = visited;
  return res;
}

}  // namespace knapq
