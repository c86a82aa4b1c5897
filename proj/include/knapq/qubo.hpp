#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "knapq/bits.hpp"
#include "knapq/instance.hpp"
#include "knapq/rng.hpp"

namespace knapq {

// Sparse quadratic form over binary variables:
//   E(x) = offset + sum_p linear[p]*x_p + sum_{p<q} quadratic[(p,q)]*x_p*x_q
// Storage is strictly upper-triangular and zero-free after finalize().
struct QuadraticForm {
  int num_vars = 0;
  double offset = 0.0;
  std::vector<double> linear;
  std::map<std::pair<int, int>, double> quadratic;
  // symmetric adjacency view of `quadratic`, built by finalize()
  std::vector<std::vector<std::pair<int, double>>> neighbors;

  void add_linear(int p, double coeff) { linear[static_cast<std::size_t>(p)] += coeff; }

  void add_quadratic(int p, int q, double coeff) {
    if (p == q) throw std::invalid_argument("quadratic term needs two distinct variables");
    if (p > q) std::swap(p, q);
    quadratic[{p, q}] += coeff;
  }

  void finalize() {
    for (auto it = quadratic.begin(); it != quadratic.end();)
      it = (it->second == 0.0) ? quadratic.erase(it) : std::next(it);
    neighbors.assign(static_cast<std::size_t>(num_vars), {});
    for (const auto& [pq, c] : quadratic) {
      neighbors[static_cast<std::size_t>(pq.first)].emplace_back(pq.second, c);
      neighbors[static_cast<std::size_t>(pq.second)].emplace_back(pq.first, c);
    }
  }

  void check_length(const Bits& x) const {
    if (static_cast<int>(x.size()) != num_vars)
      throw std::invalid_argument("bitstring length " + std::to_string(x.size()) +
                                  " does not match variable count " + std::to_string(num_vars));
  }

  double energy(const Bits& x) const {
    check_length(x);
    double e = offset;
    for (int p = 0; p < num_vars; ++p)
      if (x[static_cast<std::size_t>(p)]) e += linear[static_cast<std::size_t>(p)];
    for (const auto& [pq, c] : quadratic)
      if (x[static_cast<std::size_t>(pq.first)] && x[static_cast<std::size_t>(pq.second)]) e += c;
    return e;
  }

  // energy(x with bit p flipped) - energy(x), in O(degree of p)
  double flip_delta(const Bits& x, int p) const {
    if (p < 0 || p >= num_vars) throw std::invalid_argument("flip index out of range");
    double acc = linear[static_cast<std::size_t>(p)];
    for (const auto& [q, c] : neighbors[static_cast<std::size_t>(p)])
      if (x[static_cast<std::size_t>(q)]) acc += c;
    return x[static_cast<std::size_t>(p)] ? -acc : acc;
  }

  // continuous extension on [0,1]^L, used by the relaxation solver
  double continuous_energy(const std::vector<double>& c) const {
    double e = offset;
    for (int p = 0; p < num_vars; ++p) e += linear[static_cast<std::size_t>(p)] * c[static_cast<std::size_t>(p)];
    for (const auto& [pq, w] : quadratic)
      e += w * c[static_cast<std::size_t>(pq.first)] * c[static_cast<std::size_t>(pq.second)];
    return e;
  }
};

struct QuboWeights {
  double penalty_a = 0;   // weight of the at-most-one-knapsack penalty
  double penalty_b = 0;   // weight of the capacity-equality penalty
  double objective_c = 1; // weight of the (negated) value objective
};

struct QuboModel : QuadraticForm {
  KnapsackInstance instance;
  QubitLayout layout;
  double penalty_a = 0;
  double penalty_b = 0;
  double objective_c = 1;
};

// Values of the three Hamiltonian components on one assignment, before the
// A/B/C weights are applied. single and capacity are non-negative by
// construction; objective is minus the packed value.
struct PenaltyBreakdown {
  double single = 0;
  double capacity = 0;
  double objective = 0;
};

inline QuboModel compile(const KnapsackInstance& inst,
                         std::optional<QuboWeights> weights = std::nullopt) {
  validate_instance(inst);
  QuboModel m;
  m.instance = inst;
  m.layout = make_layout(inst);
  if (weights) {
    if (weights->penalty_a <= 0 || weights->penalty_b <= 0 || weights->objective_c <= 0)
      throw std::invalid_argument("QUBO weights must be positive");
    m.penalty_a = weights->penalty_a;
    m.penalty_b = weights->penalty_b;
    m.objective_c = weights->objective_c;
  } else {
    const long long mv = max_value(inst);
    if (mv == 0)
      throw std::invalid_argument(
          "all item values are zero, so the default penalty weights A=B=2*max(v) "
          "would vanish; pass explicit weights");
    m.penalty_a = m.penalty_b = 2.0 * static_cast<double>(mv);
    m.objective_c = 1.0;
  }

  const int n = inst.num_items;
  const int mk = inst.num_knapsacks;
  m.num_vars = m.layout.total_qubits;
  m.linear.assign(static_cast<std::size_t>(m.num_vars), 0.0);

  // at-most-one-knapsack term: (sum_i x_ij)(sum_i x_ij - 1) expands to
  // pairwise couplings between copies of the same item; the linear parts
  // cancel through x^2 = x
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < mk; ++i)
      for (int i2 = i + 1; i2 < mk; ++i2)
        m.add_quadratic(m.layout.decision_index(i, j), m.layout.decision_index(i2, j),
                        2.0 * m.penalty_a);

  // capacity equality per knapsack: (load_i + slack_i - c_i)^2 with the
  // slack in binary expansion; x^2 = x folds the squares into linear terms
  for (int i = 0; i < mk; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < n; ++j)
      terms.emplace_back(m.layout.decision_index(i, j),
                         static_cast<double>(inst.weights[static_cast<std::size_t>(j)]));
    for (int b = 0; b < m.layout.slack_counts[static_cast<std::size_t>(i)]; ++b)
      terms.emplace_back(m.layout.slack_index(i, b), std::ldexp(1.0, b));
    const double cap = static_cast<double>(inst.capacities[static_cast<std::size_t>(i)]);
    for (std::size_t a = 0; a < terms.size(); ++a) {
      const auto& [p, w] = terms[a];
      m.add_linear(p, m.penalty_b * (w * w - 2.0 * cap * w));
      for (std::size_t b2 = a + 1; b2 < terms.size(); ++b2)
        m.add_quadratic(p, terms[b2].first, 2.0 * m.penalty_b * w * terms[b2].second);
    }
    m.offset += m.penalty_b * cap * cap;
  }

  // objective: reward packed value
  for (int i = 0; i < mk; ++i)
    for (int j = 0; j < n; ++j)
      m.add_linear(m.layout.decision_index(i, j),
                   -m.objective_c *
                       static_cast<double>(inst.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));

  m.finalize();
  return m;
}

inline double energy(const QuboModel& m, const Bits& x) { return m.energy(x); }

// Exact component values, computed in integer arithmetic on the decoded
// assignment (no float roundoff, so == 0 tests are meaningful).
inline PenaltyBreakdown penalty_breakdown(const QuboModel& m, const Bits& x) {
  m.check_length(x);
  const auto& inst = m.instance;
  const auto& lay = m.layout;
  long long single = 0, capacity = 0, objective = 0;
  for (int j = 0; j < inst.num_items; ++j) {
    long long s = 0;
    for (int i = 0; i < inst.num_knapsacks; ++i)
      s += x[static_cast<std::size_t>(lay.decision_index(i, j))];
    single += s * (s - 1);
  }
  for (int i = 0; i < inst.num_knapsacks; ++i) {
    long long fill = -inst.capacities[static_cast<std::size_t>(i)];
    for (int j = 0; j < inst.num_items; ++j)
      if (x[static_cast<std::size_t>(lay.decision_index(i, j))])
        fill += inst.weights[static_cast<std::size_t>(j)];
    for (int b = 0; b < lay.slack_counts[static_cast<std::size_t>(i)]; ++b)
      if (x[static_cast<std::size_t>(lay.slack_index(i, b))]) fill += (1LL << b);
    capacity += fill * fill;
  }
  for (int i = 0; i < inst.num_knapsacks; ++i)
    for (int j = 0; j < inst.num_items; ++j)
      if (x[static_cast<std::size_t>(lay.decision_index(i, j))])
        objective -= inst.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return {static_cast<double>(single), static_cast<double>(capacity),
          static_cast<double>(objective)};
}

// Total packed value of the decoded assignment (meaningful for valid
// assignments; computed the same way regardless).
inline long long total_value(const QuboModel& m, const Bits& x) {
  m.check_length(x);
  long long v = 0;
  for (int i = 0; i < m.instance.num_knapsacks; ++i)
    for (int j = 0; j < m.instance.num_items; ++j)
      if (x[static_cast<std::size_t>(m.layout.decision_index(i, j))])
        v += m.instance.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return v;
}

namespace detail {

inline double hessian_row_sum_bound(const QuadraticForm& q) {
  double bound = 0.0;
  for (const auto& row : q.neighbors) {
    double sum = 0.0;
    for (const auto& [other, c] : row) {
      (void)other;
      sum += std::abs(c);
    }
    bound = std::max(bound, sum);
  }
  return bound;
}

}  // namespace detail

// Shift mu such that adding mu * sum(c_p^2 - c_p) makes the continuous
// extension convex on the box. The added term vanishes on every binary
// point, so the surrogate agrees with the QUBO where it matters, while its
// continuous minimum becomes unique. mu comes from the most negative
// eigenvalue of the hollow coupling matrix, found by shifted power
// iteration with a small safety margin.
inline double convexification_shift(const QuadraticForm& q) {
  if (q.quadratic.empty()) return 0.0;
  const std::size_t n = static_cast<std::size_t>(q.num_vars);
  const double bound = detail::hessian_row_sum_bound(q);

  std::vector<double> v(n), w(n);
  Rng rng(0x0c0417e4);
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.uniform(-1.0, 1.0);
    norm += x * x;
  }
  for (auto& x : v) x /= std::sqrt(norm);

  double shifted = bound;  // dominant eigenvalue of (bound*I - H)
  for (int it = 0; it < 300; ++it) {
    for (std::size_t p = 0; p < n; ++p) w[p] = bound * v[p];
    for (const auto& [pq, c] : q.quadratic) {
      w[static_cast<std::size_t>(pq.first)] -= c * v[static_cast<std::size_t>(pq.second)];
      w[static_cast<std::size_t>(pq.second)] -= c * v[static_cast<std::size_t>(pq.first)];
    }
    norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    shifted = norm;
    for (std::size_t p = 0; p < n; ++p) v[p] = w[p] / norm;
  }
  const double lambda_min = bound - shifted;
  return std::max(0.0, -0.5 * lambda_min) * 1.05 + 1e-9;
}

inline double convexified_energy(const QuadraticForm& q, double mu,
                                 const std::vector<double>& c) {
  double e = q.continuous_energy(c);
  for (double v : c) e += mu * (v * v - v);
  return e;
}

namespace detail {

// One fixed-step projected gradient descent pass on f + mu*sum(c^2 - c).
inline void pgd_descend(const QuadraticForm& q, double mu, double step, int iterations,
                        std::vector<double>& c, std::vector<double>& grad) {
  const std::size_t n = c.size();
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t p = 0; p < n; ++p) grad[p] = q.linear[p] + mu * (2.0 * c[p] - 1.0);
    for (const auto& [pq, w] : q.quadratic) {
      grad[static_cast<std::size_t>(pq.first)] += w * c[static_cast<std::size_t>(pq.second)];
      grad[static_cast<std::size_t>(pq.second)] += w * c[static_cast<std::size_t>(pq.first)];
    }
    for (std::size_t p = 0; p < n; ++p) c[p] = std::clamp(c[p] - step * grad[p], 0.0, 1.0);
  }
}

// Compact Metropolis incumbent search; a cheap way to start one descent
// from a strong vertex. (The continuous extension of a zero-diagonal
// quadratic is linear per coordinate, so its box minimum sits on a vertex.)
inline std::vector<double> metropolis_start(const QuadraticForm& q, std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(q.num_vars);
  double mean_abs = 0.0, min_abs = 0.0;
  long long nz = 0;
  auto feed = [&](double c) {
    if (c == 0.0) return;
    mean_abs += std::abs(c);
    min_abs = (nz == 0) ? std::abs(c) : std::min(min_abs, std::abs(c));
    ++nz;
  };
  for (double c : q.linear) feed(c);
  for (const auto& [pq, c] : q.quadratic) {
    (void)pq;
    feed(c);
  }
  const double beta_min = nz ? 0.1 / (mean_abs / static_cast<double>(nz)) : 0.1;
  const double beta_max = nz ? 10.0 / min_abs : 10.0;

  Bits best;
  double best_e = 0.0;
  Bits x(n);
  constexpr int kReads = 32, kSweeps = 400;
  for (int read = 0; read < kReads; ++read) {
    Rng rng(derive_seed(seed, 0x3e7a, static_cast<std::uint64_t>(read)));
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    double e = q.energy(x);
    if (best.empty() || e < best_e) {
      best = x;
      best_e = e;
    }
    for (int sweep = 0; sweep < kSweeps; ++sweep) {
      const double beta = beta_min * std::pow(beta_max / beta_min,
                                              static_cast<double>(sweep) / (kSweeps - 1));
      for (int p = 0; p < q.num_vars; ++p) {
        const double d = q.flip_delta(x, p);
        if (d <= 0.0 || rng.uniform() < std::exp(-beta * d)) {
          x[static_cast<std::size_t>(p)] ^= 1u;
          e += d;
          if (e < best_e) {  // keep the best configuration seen anywhere
            best = x;
            best_e = e;
          }
        }
      }
    }
  }
  std::vector<double> c(n);
  for (std::size_t p = 0; p < n; ++p) c[p] = best[p] ? 1.0 : 0.0;
  return c;
}

}  // namespace detail

// Best-of-restarts projected gradient descent on the box [0,1]^L with fixed
// step 1/(2 * Lipschitz bound) and 500 iterations per start. Random starts
// alone tend to settle in mediocre vertices, so the first two starts are
// informed: the optimum of the convexified surrogate and a short annealed
// incumbent. Every start runs the same descent and the lowest continuous
// energy wins (ties to the earliest start). The result is clamped to
// [eps, 1-eps] so downstream angle constructions stay non-degenerate.
inline std::vector<double> solve_relaxation(const QuadraticForm& q, int restarts = 16,
                                            std::uint64_t seed = 1) {
  constexpr double kEps = 0.01;
  constexpr int kIterations = 500;
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  const std::size_t n = static_cast<std::size_t>(q.num_vars);

  const double mu = convexification_shift(q);
  const double lip = detail::hessian_row_sum_bound(q);
  const double step = 1.0 / (2.0 * std::max(lip, 1.0));
  const double step_cvx = 1.0 / (2.0 * std::max(lip + 2.0 * mu, 1.0));

  std::vector<double> best;
  double best_energy = 0.0;
  std::vector<double> c(n), grad(n);
  for (int r = 0; r < restarts; ++r) {
    if (r == 0 && mu > 0.0) {
      c.assign(n, 0.5);
      detail::pgd_descend(q, mu, step_cvx, kIterations, c, grad);
    } else if (r <= 1) {
      c = detail::metropolis_start(q, seed);
    } else {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
      for (auto& v : c) v = rng.uniform();
    }
    detail::pgd_descend(q, 0.0, step, kIterations, c, grad);
    const double e = q.continuous_energy(c);
    if (best.empty() || e < best_energy) {
      best = c;
      best_energy = e;
    }
  }
  for (auto& v : best) v = std::clamp(v, kEps, 1.0 - kEps);
  return best;
}

// Plain-text term dump for interchange with external QUBO tooling:
//   offset <value>
//   lin <p> <coeff>
//   quad <p> <q> <coeff>
inline void write_qubo_dump(const QuadraticForm& q, std::ostream& out) {
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "offset " << fmt(q.offset) << "\n";
  for (int p = 0; p < q.num_vars; ++p)
    if (q.linear[static_cast<std::size_t>(p)] != 0.0)
      out << "lin " << p << " " << fmt(q.linear[static_cast<std::size_t>(p)]) << "\n";
  for (const auto& [pq, c] : q.quadratic)
    out << "quad " << pq.first << " " << pq.second << " " << fmt(c) << "\n";
}

inline QuadraticForm read_qubo_dump(std::istream& in, int num_vars) {
  QuadraticForm q;
  q.num_vars = num_vars;
  q.linear.assign(static_cast<std::size_t>(num_vars), 0.0);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    bool ok = true;
    if (tag == "offset") {
      ok = static_cast<bool>(ls >> q.offset);
    } else if (tag == "lin") {
      int p;
      double c;
      ok = static_cast<bool>(ls >> p >> c);
      if (ok) q.add_linear(p, c);
    } else if (tag == "quad") {
      int p, r;
      double c;
      ok = static_cast<bool>(ls >> p >> r >> c);
      if (ok) q.add_quadratic(p, r, c);
    } else {
      ok = false;
    }
    if (!ok)
      throw std::runtime_error("QUBO dump line " + std::to_string(lineno) +
                               ": cannot parse '" + line + "'");
  }
  q.finalize();
  return q;
}

}  // namespace knapq
