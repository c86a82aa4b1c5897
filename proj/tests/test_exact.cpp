#include "catch_amalgamated.hpp"
#include "knapq/exact.hpp"
#include "knapq/qubo.hpp"
#include "knapq/rng.hpp"

using namespace knapq;

namespace {

KnapsackInstance minimal_instance() {
  KnapsackInstance inst;
  inst.name = "minimal";
  inst.num_items = 1;
  inst.num_knapsacks = 1;
  inst.weights = {1};
  inst.values = {{3}};
  inst.capacities = {1};
  return inst;
}

// Reference solver for small instances: try every per-item assignment
// (none or one of the knapsacks) and keep the best feasible packing.
long long enumerate_assignments(const KnapsackInstance& inst) {
  const int n = inst.num_items;
  const int mk = inst.num_knapsacks;
  long long best = 0;
  std::vector<int> choice(static_cast<std::size_t>(n), -1);
  const auto recurse = [&](auto&& self, int item) -> void {
    if (item == n) {
      std::vector<long long> load(static_cast<std::size_t>(mk), 0);
      long long value = 0;
      for (int j = 0; j < n; ++j) {
        const int i = choice[static_cast<std::size_t>(j)];
        if (i < 0) continue;
        load[static_cast<std::size_t>(i)] += inst.weights[static_cast<std::size_t>(j)];
        value += inst.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      for (int i = 0; i < mk; ++i)
        if (load[static_cast<std::size_t>(i)] > inst.capacities[static_cast<std::size_t>(i)])
          return;
      best = std::max(best, value);
      return;
    }
    for (int i = -1; i < mk; ++i) {
      choice[static_cast<std::size_t>(item)] = i;
      self(self, item + 1);
    }
  };
  recurse(recurse, 0);
  return best;
}

}  // namespace

TEST_CASE("two-point enumeration keeps the lower branch") {
  QuboModel m;
  m.num_vars = 1;
  m.offset = 2.5;
  m.linear = {1.0};
  m.finalize();
  const ExactResult res = brute_force_qubo(static_cast<const QuadraticForm&>(m));
  REQUIRE(res.best_bitstring == "0");
  REQUIRE(res.best_energy == 2.5);
  REQUIRE(res.enumerated_count == 2);
}

TEST_CASE("minimal hand instance enumerates to the exact packing") {
  const QuboModel m = compile(minimal_instance());
  const ExactResult res = brute_force_qubo(m);
  // four candidates: 00 -> 6, 10 -> -3, 01 -> 0, 11 -> 3
  REQUIRE(res.best_bitstring == "10");
  REQUIRE(res.best_energy == -3.0);
  REQUIRE(res.optimal_value == 3);
  REQUIRE(res.enumerated_count == 4);
}

TEST_CASE("energy ties break toward the lexicographically smallest bitstring") {
  QuboModel m;  // two decoupled zero-coefficient variables: all energies equal
  m.num_vars = 2;
  m.linear = {0.0, 0.0};
  m.finalize();
  const ExactResult res = brute_force_qubo(static_cast<const QuadraticForm&>(m));
  REQUIRE(res.best_bitstring == "00");
}

TEST_CASE("enumeration budget is enforced") {
  QuboModel m;
  m.num_vars = 27;
  m.linear.assign(27, 0.0);
  m.finalize();
  REQUIRE_THROWS_AS(brute_force_qubo(static_cast<const QuadraticForm&>(m)),
                    std::invalid_argument);
}

TEST_CASE("single item that fits is packed") {
  KnapsackInstance inst = minimal_instance();
  inst.values = {{7}};
  const ExactResult res = branch_and_bound(inst);
  REQUIRE(res.optimal_value == 7);
  REQUIRE(res.best_bitstring == "10");  // item packed, slack exactly 0
}

TEST_CASE("an item heavier than every capacity stays out") {
  KnapsackInstance inst = minimal_instance();
  inst.weights = {5};
  const ExactResult res = branch_and_bound(inst);
  REQUIRE(res.optimal_value == 0);
  // empty packing, slack equals the full capacity
  REQUIRE(res.best_bitstring == "01");
}

TEST_CASE("desk-scale budget is enforced") {
  const KnapsackInstance inst = generate_instance(16, 2, {1, 3}, {1, 3}, {4, 6}, 3);
  REQUIRE_THROWS_AS(branch_and_bound(inst), std::invalid_argument);
}

TEST_CASE("branch and bound matches exhaustive assignment enumeration") {
  Rng rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    const KnapsackInstance inst =
        generate_instance(4, 2, {0, 6}, {0, 9}, {1, 10}, rng.next_u64());
    const ExactResult res = branch_and_bound(inst);
    REQUIRE(res.optimal_value == enumerate_assignments(inst));
    // the reported bitstring is itself an exact packing of that value
    const QuboModel m = compile(inst, QuboWeights{1.0, 1.0, 1.0});
    const Bits bits = bits_from_string(res.best_bitstring);
    const PenaltyBreakdown pb = penalty_breakdown(m, bits);
    REQUIRE(pb.single == 0.0);
    REQUIRE(pb.capacity == 0.0);
    REQUIRE(total_value(m, bits) == res.optimal_value);
  }
}

TEST_CASE("QUBO minimizer and branch and bound agree on random small instances") {
  Rng rng(4321);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + rng.uniform_index(4);
    const int mk = 1 + rng.uniform_index(2);
    const KnapsackInstance inst =
        generate_instance(n, mk, {0, 6}, {1, 9}, {1, 14}, rng.next_u64());
    const QuboModel m = compile(inst);
    if (m.num_vars > 16) continue;
    const ExactResult qubo_min = brute_force_qubo(m);
    const ExactResult bb = branch_and_bound(inst);
    const Bits best = bits_from_string(qubo_min.best_bitstring);
    const PenaltyBreakdown pb = penalty_breakdown(m, best);
    REQUIRE(pb.single == 0.0);
    REQUIRE(pb.capacity == 0.0);
    REQUIRE(total_value(m, best) == bb.optimal_value);
    // and the encoded optimum evaluates to the same energy
    REQUIRE(energy(m, bits_from_string(bb.best_bitstring)) == qubo_min.best_energy);
  }
}
