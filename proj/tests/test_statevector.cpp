#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "dense_oracle.hpp"
#include "knapq/qubo.hpp"
#include "knapq/rng.hpp"
#include "knapq/statevector.hpp"

using namespace knapq;
constexpr double pi = std::numbers::pi;

namespace {

oracle::Vec to_vec(const StateVector& s) { return {s.amps.begin(), s.amps.end()}; }

StateVector random_state(Rng& rng, int n) {
  StateVector s{n, std::vector<cplx>(std::size_t{1} << n)};
  double norm = 0.0;
  for (auto& a : s.amps) {
    a = cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    norm += std::norm(a);
  }
  for (auto& a : s.amps) a /= std::sqrt(norm);
  return s;
}

DiagonalHamiltonian random_hamiltonian(Rng& rng, int n) {
  QuadraticForm q;
  q.num_vars = n;
  q.offset = rng.uniform(-1, 1);
  q.linear.resize(static_cast<std::size_t>(n));
  for (auto& l : q.linear) l = rng.uniform(-2, 2);
  for (int p = 0; p < n; ++p)
    for (int r = p + 1; r < n; ++r)
      if (rng.uniform() < 0.7) q.add_quadratic(p, r, rng.uniform(-2, 2));
  q.finalize();
  return diagonal_hamiltonian(q);
}

std::vector<double> energies_of(const DiagonalHamiltonian& h) {
  std::vector<double> e(std::size_t{1} << h.num_qubits);
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = h.energy(k);
  return e;
}

}  // namespace

TEST_CASE("uniform state has equal real amplitudes and unit norm") {
  const StateVector one = uniform_state(1);
  REQUIRE_THAT(one.amps[0].real(), Catch::Matchers::WithinAbs(1.0 / std::sqrt(2.0), 1e-15));
  const StateVector two = uniform_state(2);
  for (const cplx& a : two.amps) REQUIRE_THAT(std::abs(a - cplx{0.5, 0.0}), Catch::Matchers::WithinAbs(0.0, 1e-15));
  for (int n = 1; n <= 10; ++n)
    REQUIRE_THAT(norm_squared(uniform_state(n)), Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THROWS_AS(uniform_state(0), std::invalid_argument);
  REQUIRE_THROWS_AS(uniform_state(27), std::invalid_argument);
}

TEST_CASE("warm-start state reproduces the target marginals exactly") {
  const StateVector half = warm_start_state({0.5});
  REQUIRE_THAT(std::abs(half.amps[0] - cplx{1.0 / std::sqrt(2.0), 0}),
               Catch::Matchers::WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(std::abs(half.amps[1] - cplx{1.0 / std::sqrt(2.0), 0}),
               Catch::Matchers::WithinAbs(0.0, 1e-15));

  const std::vector<double> c{0.25, 0.25};
  const StateVector s = warm_start_state(c);
  for (int l = 0; l < 2; ++l) {
    double p1 = 0.0;
    for (std::size_t k = 0; k < s.amps.size(); ++k)
      if (k & (std::size_t{1} << l)) p1 += std::norm(s.amps[k]);
    REQUIRE_THAT(p1, Catch::Matchers::WithinAbs(0.25, 1e-14));
  }

  // random marginals, closed-form check
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + rng.uniform_index(4);
    std::vector<double> cs(static_cast<std::size_t>(n));
    for (auto& v : cs) v = rng.uniform(0.05, 0.95);
    const StateVector ws = warm_start_state(cs);
    for (int l = 0; l < n; ++l) {
      double p1 = 0.0;
      for (std::size_t k = 0; k < ws.amps.size(); ++k)
        if (k & (std::size_t{1} << l)) p1 += std::norm(ws.amps[k]);
      REQUIRE_THAT(p1, Catch::Matchers::WithinAbs(cs[static_cast<std::size_t>(l)], 1e-12));
    }
  }

  // c* = 0.5 everywhere is the uniform state
  const StateVector u = warm_start_state({0.5, 0.5, 0.5});
  for (std::size_t k = 0; k < u.amps.size(); ++k)
    REQUIRE_THAT(std::abs(u.amps[k] - uniform_state(3).amps[k]),
                 Catch::Matchers::WithinAbs(0.0, 1e-14));

  REQUIRE_THROWS_AS(warm_start_state({0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(warm_start_state({1.0}), std::invalid_argument);
}

TEST_CASE("phase evolution follows exp(-i gamma E_k)") {
  Rng rng(11);
  const DiagonalHamiltonian h = random_hamiltonian(rng, 3);

  StateVector s = random_state(rng, 3);
  const StateVector before = s;
  apply_phase(s, h, 0.0);
  for (std::size_t k = 0; k < s.amps.size(); ++k)
    REQUIRE_THAT(std::abs(s.amps[k] - before.amps[k]), Catch::Matchers::WithinAbs(0.0, 1e-15));

  // constant Hamiltonian shifts only the global phase
  QuadraticForm constant;
  constant.num_vars = 3;
  constant.offset = 1.7;
  constant.linear.assign(3, 0.0);
  constant.finalize();
  StateVector t = random_state(rng, 3);
  const StateVector t0 = t;
  apply_phase(t, diagonal_hamiltonian(constant), 0.9);
  for (std::size_t k = 0; k < t.amps.size(); ++k)
    REQUIRE_THAT(std::norm(t.amps[k]) - std::norm(t0.amps[k]),
                 Catch::Matchers::WithinAbs(0.0, 1e-15));

  // n = 2 ladder 0,1,2,3 at gamma = pi alternates signs
  QuadraticForm ladder;
  ladder.num_vars = 2;
  ladder.linear = {1.0, 2.0};
  ladder.finalize();
  StateVector u = uniform_state(2);
  apply_phase(u, diagonal_hamiltonian(ladder), pi);
  const double expected[] = {0.5, -0.5, 0.5, -0.5};
  for (std::size_t k = 0; k < 4; ++k) {
    REQUIRE_THAT(u.amps[k].real(), Catch::Matchers::WithinAbs(expected[k], 1e-12));
    REQUIRE_THAT(u.amps[k].imag(), Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("phase applications compose additively in gamma") {
  Rng rng(13);
  const DiagonalHamiltonian h = random_hamiltonian(rng, 4);
  StateVector a = random_state(rng, 4);
  StateVector b = a;
  apply_phase(a, h, 0.4);
  apply_phase(a, h, 0.9);
  apply_phase(b, h, 1.3);
  for (std::size_t k = 0; k < a.amps.size(); ++k)
    REQUIRE_THAT(std::abs(a.amps[k] - b.amps[k]), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("transverse mixer limits behave as the matrix says") {
  StateVector s = basis_state(1, 0);
  apply_x_mixer(s, 0.0);
  REQUIRE_THAT(std::abs(s.amps[0] - cplx{1, 0}), Catch::Matchers::WithinAbs(0.0, 1e-15));

  // beta = pi/2 sends |0> to -i|1>
  StateVector t = basis_state(1, 0);
  apply_x_mixer(t, pi / 2);
  REQUIRE_THAT(std::abs(t.amps[0]), Catch::Matchers::WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(std::abs(t.amps[1] - cplx{0, -1}), Catch::Matchers::WithinAbs(0.0, 1e-15));

  // beta = pi is a global sign per qubit
  Rng rng(3);
  StateVector u = random_state(rng, 3);
  const StateVector u0 = u;
  apply_x_mixer(u, pi);
  for (std::size_t k = 0; k < u.amps.size(); ++k)
    REQUIRE_THAT(std::abs(u.amps[k] + u0.amps[k]), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("single-qubit rotations and CX have textbook behavior") {
  StateVector s = basis_state(1, 0);
  apply_ry(s, 0, pi);
  REQUIRE_THAT(std::norm(s.amps[1]), Catch::Matchers::WithinAbs(1.0, 1e-12));

  StateVector two = basis_state(2, 1);  // |10>: qubit 0 set
  apply_cx(two, 0, 1);
  REQUIRE_THAT(std::norm(two.amps[3]), Catch::Matchers::WithinAbs(1.0, 1e-12));

  Rng rng(31);
  StateVector r = random_state(rng, 3);
  const StateVector r0 = r;
  apply_cx(r, 2, 0);
  apply_cx(r, 2, 0);
  for (std::size_t k = 0; k < r.amps.size(); ++k)
    REQUIRE_THAT(std::abs(r.amps[k] - r0.amps[k]), Catch::Matchers::WithinAbs(0.0, 1e-15));

  REQUIRE_THROWS_AS(apply_cx(r, 1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(apply_ry(r, 5, 0.3), std::invalid_argument);
}

TEST_CASE("warm-start mixer fixes its defining state and matches the exponential") {
  Rng rng(41);
  // probability invariance of the warm-start state, any beta
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + rng.uniform_index(4);
    std::vector<double> cs(static_cast<std::size_t>(n));
    for (auto& v : cs) v = rng.uniform(0.02, 0.98);
    const double beta = rng.uniform(-pi, pi);
    StateVector s = warm_start_state(cs);
    const StateVector s0 = s;
    apply_ws_mixer(s, cs, beta);
    for (std::size_t k = 0; k < s.amps.size(); ++k)
      REQUIRE_THAT(std::norm(s.amps[k]) - std::norm(s0.amps[k]),
                   Catch::Matchers::WithinAbs(0.0, 1e-12));
  }

  // beta = 0 is the identity for any c*
  StateVector id = random_state(rng, 2);
  const StateVector id0 = id;
  apply_ws_mixer(id, {0.3, 0.8}, 0.0);
  for (std::size_t k = 0; k < id.amps.size(); ++k)
    REQUIRE_THAT(std::abs(id.amps[k] - id0.amps[k]), Catch::Matchers::WithinAbs(0.0, 1e-15));

  // against the closed-form exponential of the 2x2 mixer Hamiltonian
  for (int trial = 0; trial < 50; ++trial) {
    const double c = rng.uniform(0.05, 0.95);
    const double beta = rng.uniform(-pi, pi);
    StateVector s = basis_state(1, 0);
    apply_ws_mixer(s, {c}, beta);
    const oracle::Vec expected = oracle::matvec(oracle::ws_mixer_exp(c, beta), {1.0, 0.0});
    REQUIRE(oracle::max_abs_diff(to_vec(s), expected) < 1e-12);
  }
}

TEST_CASE("every gate matches its dense Kronecker embedding") {
  Rng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + rng.uniform_index(4);
    StateVector s = random_state(rng, n);
    const oracle::Vec before = to_vec(s);
    oracle::Mat u;
    switch (rng.uniform_index(6)) {
      case 0: {
        const int q = rng.uniform_index(n);
        const double a = rng.uniform(-pi, pi);
        apply_ry(s, q, a);
        u = oracle::embed_1q(n, q, oracle::ry(a));
        break;
      }
      case 1: {
        const int q = rng.uniform_index(n);
        const double a = rng.uniform(-pi, pi);
        apply_rz(s, q, a);
        u = oracle::embed_1q(n, q, oracle::rz(a));
        break;
      }
      case 2: {
        if (n == 1) continue;
        const int c = rng.uniform_index(n);
        int t = rng.uniform_index(n - 1);
        if (t >= c) ++t;
        apply_cx(s, c, t);
        u = oracle::embed_cx(n, c, t);
        break;
      }
      case 3: {
        const double beta = rng.uniform(-pi, pi);
        apply_x_mixer(s, beta);
        u = oracle::identity(1ULL << n);
        for (int q = 0; q < n; ++q)
          u = oracle::matmul(oracle::embed_1q(n, q, oracle::x_mixer_1q(beta)), u);
        break;
      }
      case 4: {
        std::vector<double> cs(static_cast<std::size_t>(n));
        for (auto& v : cs) v = rng.uniform(0.05, 0.95);
        const double beta = rng.uniform(-pi, pi);
        apply_ws_mixer(s, cs, beta);
        u = oracle::identity(1ULL << n);
        for (int q = 0; q < n; ++q)
          u = oracle::matmul(
              oracle::embed_1q(n, q, oracle::ws_mixer_exp(cs[static_cast<std::size_t>(q)], beta)), u);
        break;
      }
      default: {
        const DiagonalHamiltonian h = random_hamiltonian(rng, n);
        const double gamma = rng.uniform(-pi, pi);
        apply_phase(s, h, gamma);
        u = oracle::diagonal_phase(energies_of(h), gamma);
        break;
      }
    }
    REQUIRE(oracle::max_abs_diff(to_vec(s), oracle::matvec(u, before)) < 1e-9);
  }
}

TEST_CASE("norm is preserved through long random gate sequences") {
  Rng rng(61);
  StateVector s = uniform_state(4);
  const DiagonalHamiltonian h = random_hamiltonian(rng, 4);
  const std::vector<double> cs{0.2, 0.4, 0.6, 0.8};
  for (int i = 0; i < 10000; ++i) {
    switch (rng.uniform_index(6)) {
      case 0: apply_ry(s, rng.uniform_index(4), rng.uniform(-pi, pi)); break;
      case 1: apply_rz(s, rng.uniform_index(4), rng.uniform(-pi, pi)); break;
      case 2: {
        const int c = rng.uniform_index(4);
        int t = rng.uniform_index(3);
        if (t >= c) ++t;
        apply_cx(s, c, t);
        break;
      }
      case 3: apply_x_mixer(s, rng.uniform(-pi, pi)); break;
      case 4: apply_ws_mixer(s, cs, rng.uniform(-pi, pi)); break;
      default: apply_phase(s, h, rng.uniform(-pi, pi)); break;
    }
  }
  REQUIRE_THAT(norm_squared(s), Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("tabulated and on-the-fly diagonal energies agree") {
  Rng rng(67);
  QuadraticForm q;
  q.num_vars = 5;
  q.offset = 0.3;
  q.linear.resize(5);
  for (auto& l : q.linear) l = rng.uniform(-2, 2);
  q.add_quadratic(0, 3, 1.4);
  q.add_quadratic(1, 4, -0.7);
  q.finalize();
  const DiagonalHamiltonian table = diagonal_hamiltonian(q);
  const DiagonalHamiltonian lazy = diagonal_hamiltonian(q, /*table_max_qubits=*/2);
  REQUIRE(!table.table.empty());
  REQUIRE(lazy.table.empty());
  for (std::uint64_t k = 0; k < 32; ++k)
    REQUIRE_THAT(lazy.energy(k), Catch::Matchers::WithinAbs(table.energy(k), 1e-12));
}

TEST_CASE("expectation is the probability-weighted energy") {
  Rng rng(71);
  const DiagonalHamiltonian h = random_hamiltonian(rng, 3);
  const std::vector<double> e = energies_of(h);

  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(e.size());
  REQUIRE_THAT(expectation(uniform_state(3), h), Catch::Matchers::WithinAbs(mean, 1e-12));

  for (std::size_t k = 0; k < e.size(); ++k)
    REQUIRE_THAT(expectation(basis_state(3, k), h), Catch::Matchers::WithinAbs(e[k], 1e-12));
}

TEST_CASE("shot-estimated mean agrees with the exact expectation within 4 sigma") {
  Rng rng(73);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + rng.uniform_index(3);
    const DiagonalHamiltonian h = random_hamiltonian(rng, n);
    const StateVector s = random_state(rng, n);
    const double exact = expectation(s, h);
    double second = 0.0;
    for (std::size_t k = 0; k < s.amps.size(); ++k)
      second += std::norm(s.amps[k]) * h.energy(k) * h.energy(k);
    const double sigma = std::sqrt(std::max(0.0, second - exact * exact) / 10000.0);

    const SampleDistribution d = sample(s, 10000, rng.next_u64());
    double mean = 0.0;
    for (const auto& [key, count] : d.counts)
      mean += static_cast<double>(count) * h.energy(index_from_bits(bits_from_string(key)));
    mean /= 10000.0;
    REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(exact, 4.0 * sigma + 1e-12));
  }
}

TEST_CASE("sampling a basis state concentrates all shots") {
  const SampleDistribution d = sample(basis_state(3, 5), 500, 9);
  REQUIRE(d.total_shots == 500);
  REQUIRE(d.counts.size() == 1);
  // index 5 = bits 101 -> qubit 0 leftmost
  REQUIRE(d.counts.begin()->first == "101");
  REQUIRE(d.counts.begin()->second == 500);
}

TEST_CASE("uniform two-qubit sampling stays within the binomial bound") {
  const SampleDistribution d = sample(uniform_state(2), 10000, 17);
  REQUIRE(d.total_shots == 10000);
  const double sigma = std::sqrt(10000.0 * 0.25 * 0.75);
  for (const auto& [key, count] : d.counts) {
    (void)key;
    REQUIRE(std::abs(static_cast<double>(count) - 2500.0) < 4.0 * sigma);
  }
}

TEST_CASE("sampling is deterministic per seed") {
  Rng rng(83);
  const StateVector s = random_state(rng, 4);
  const SampleDistribution a = sample(s, 2000, 42);
  const SampleDistribution b = sample(s, 2000, 42);
  REQUIRE(a.counts == b.counts);
  const SampleDistribution c = sample(s, 2000, 43);
  REQUIRE(a.counts != c.counts);
}
