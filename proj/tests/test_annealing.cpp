#include "catch_amalgamated.hpp"
#include "knapq/annealing.hpp"
#include "knapq/exact.hpp"
#include "knapq/metrics.hpp"
#include "knapq/qubo.hpp"
#include "knapq/rng.hpp"

using namespace knapq;

namespace {

QuboModel random_form(int num_vars, std::uint64_t seed) {
  QuboModel m;
  m.num_vars = num_vars;
  Rng rng(seed);
  m.offset = rng.uniform(-2, 2);
  m.linear.resize(static_cast<std::size_t>(num_vars));
  for (auto& l : m.linear) l = rng.uniform(-3, 3);
  for (int p = 0; p < num_vars; ++p)
    for (int q = p + 1; q < num_vars; ++q)
      if (rng.uniform() < 0.6) m.add_quadratic(p, q, rng.uniform(-3, 3));
  m.finalize();
  return m;
}

Bits random_bits(Rng& rng, int n) {
  Bits x(static_cast<std::size_t>(n));
  for (auto& b : x) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
  return x;
}

}  // namespace

TEST_CASE("a constant model anneals to arbitrary strings at the offset energy") {
  QuboModel m;
  m.num_vars = 3;
  m.offset = 4.25;
  m.linear.assign(3, 0.0);
  m.finalize();
  AnnealConfig cfg;
  cfg.num_reads = 50;
  cfg.sweeps_per_read = 20;
  cfg.seed = 5;
  const SampleDistribution d = simulated_annealing(m, cfg);
  REQUIRE(d.total_shots == 50);
  for (const auto& [key, count] : d.counts) {
    (void)count;
    REQUIRE(m.energy(bits_from_string(key)) == 4.25);
  }
}

TEST_CASE("a strongly biased single variable freezes out") {
  QuboModel m;
  m.num_vars = 1;
  m.linear = {5.0};
  m.finalize();
  AnnealConfig cfg;
  cfg.num_reads = 1000;
  cfg.sweeps_per_read = 100;
  cfg.beta_min = 0.1;
  cfg.beta_max = 5.0;
  cfg.seed = 11;
  const SampleDistribution d = simulated_annealing(m, cfg);
  REQUIRE(d.probability("0") >= 0.99);
}

TEST_CASE("incremental deltas track full recomputation") {
  // isolated variable: delta is its linear coefficient
  QuboModel iso;
  iso.num_vars = 2;
  iso.linear = {1.5, 0.0};
  iso.finalize();
  const Bits zeros{0, 0};
  REQUIRE(incremental_delta(iso, zeros, 0) == 1.5);
  REQUIRE_THROWS_AS(incremental_delta(iso, zeros, 2), std::invalid_argument);

  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const QuboModel m = random_form(8, rng.next_u64());
    Bits x = random_bits(rng, 8);
    for (int i = 0; i < 500; ++i) {
      const int p = rng.uniform_index(8);
      const double d = incremental_delta(m, x, p);
      Bits flipped = x;
      flipped[static_cast<std::size_t>(p)] ^= 1u;
      REQUIRE_THAT(d, Catch::Matchers::WithinAbs(m.energy(flipped) - m.energy(x), 1e-9));
      // flipping back must cancel exactly
      REQUIRE_THAT(incremental_delta(m, flipped, p), Catch::Matchers::WithinAbs(-d, 1e-12));
      x = flipped;
    }
  }
}

TEST_CASE("sub-QUBO folding preserves energies exactly") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + rng.uniform_index(8);
    const QuboModel m = random_form(n, rng.next_u64());
    const Bits clamped = random_bits(rng, n);
    const int k = 1 + rng.uniform_index(n);
    std::vector<int> indices(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) indices[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i)
      std::swap(indices[static_cast<std::size_t>(i)],
                indices[static_cast<std::size_t>(i + rng.uniform_index(n - i))]);
    std::vector<int> keep(indices.begin(), indices.begin() + k);
    std::sort(keep.begin(), keep.end());

    const QuadraticForm sub = fold_subproblem(m, keep, clamped);
    for (int probe = 0; probe < 20; ++probe) {
      const Bits y = random_bits(rng, k);
      Bits spliced = clamped;
      for (int i = 0; i < k; ++i)
        spliced[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] =
            y[static_cast<std::size_t>(i)];
      REQUIRE_THAT(sub.energy(y), Catch::Matchers::WithinAbs(m.energy(spliced), 1e-9));
    }
  }
}

TEST_CASE("cold two-variable annealing recovers the exact ground state") {
  Rng rng(23);
  int hits = 0, total = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const QuboModel m = random_form(2, rng.next_u64());
    const ExactResult exact = brute_force_qubo(static_cast<const QuadraticForm&>(m));
    AnnealConfig cfg;
    cfg.num_reads = 1000;
    cfg.sweeps_per_read = 1000;
    cfg.beta_max = 50.0;
    cfg.seed = rng.next_u64();
    const SampleDistribution d = simulated_annealing(m, cfg);
    for (const auto& [key, count] : d.counts) {
      total += static_cast<int>(count);
      if (m.energy(bits_from_string(key)) == exact.best_energy) hits += static_cast<int>(count);
    }
  }
  REQUIRE(static_cast<double>(hits) >= 0.999 * static_cast<double>(total));
}

TEST_CASE("IHS over the whole variable set with brute force is one-shot optimal") {
  const QuboModel m = compile(scenario_instance(2));
  IhsConfig cfg;
  cfg.subproblem_size = m.num_vars;
  cfg.max_iterations = 1;
  cfg.inner_solver = IhsConfig::Inner::BruteForce;
  const RunReport report = ihs(m, cfg, 3);
  const ExactResult exact = brute_force_qubo(m);
  REQUIRE(report.best_energy == exact.best_energy);
}

TEST_CASE("IHS energy traces are monotone and end at or below the start") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const QuboModel m = random_form(15, rng.next_u64());
    IhsConfig cfg;
    cfg.subproblem_size = 6;
    cfg.max_iterations = 25;
    cfg.inner_reads = 20;
    cfg.inner_sweeps = 60;
    const RunReport report = ihs(m, cfg, rng.next_u64());
    REQUIRE(!report.energy_trace.empty());
    for (std::size_t i = 1; i < report.energy_trace.size(); ++i)
      REQUIRE(report.energy_trace[i] <= report.energy_trace[i - 1] + 1e-12);
    REQUIRE(report.best_energy <= report.energy_trace.front() + 1e-12);
    REQUIRE(report.best_energy == report.energy_trace.back());
  }
}

TEST_CASE("IHS restarts on stall and spends its whole iteration budget") {
  QuboModel m;  // constant model: nothing ever improves, every walk stalls
  m.num_vars = 6;
  m.linear.assign(6, 0.0);
  m.offset = 1.5;
  m.finalize();
  IhsConfig cfg;
  cfg.subproblem_size = 3;
  cfg.max_iterations = 50;
  cfg.stall_limit = 4;
  cfg.inner_solver = IhsConfig::Inner::BruteForce;
  const RunReport report = ihs(m, cfg, 9);
  REQUIRE(report.n_iter == 50);
  REQUIRE(report.best_energy == 1.5);
  for (double e : report.energy_trace) REQUIRE(e == 1.5);
}

TEST_CASE("annealing and IHS find the optimum of a bundled instance") {
  const KnapsackInstance inst = scenario_instance(2);
  const QuboModel m = compile(inst);
  const long long v_opt = branch_and_bound(inst).optimal_value;

  AnnealConfig sa_cfg;
  sa_cfg.seed = 21;
  const SampleDistribution d = simulated_annealing(m, sa_cfg);
  const BestSample best = best_sample(d, m);
  REQUIRE(best.valid);
  REQUIRE(best.value == v_opt);

  IhsConfig ihs_cfg;
  ihs_cfg.subproblem_size = 12;
  const RunReport report = ihs(m, ihs_cfg, 22);
  REQUIRE(report.valid);
  REQUIRE(report.best_value == v_opt);
}

TEST_CASE("invalid anneal and IHS configurations are rejected") {
  const QuboModel m = random_form(4, 31);
  AnnealConfig bad;
  bad.num_reads = 0;
  REQUIRE_THROWS_AS(simulated_annealing(m, bad), std::invalid_argument);
  AnnealConfig inverted;
  inverted.beta_min = 2.0;
  inverted.beta_max = 1.0;
  REQUIRE_THROWS_AS(simulated_annealing(m, inverted), std::invalid_argument);
  IhsConfig big;
  big.subproblem_size = 9;
  REQUIRE_THROWS_AS(ihs(m, big, 1), std::invalid_argument);
}
