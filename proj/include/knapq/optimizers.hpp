#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace knapq {

using Objective = std::function<double(const std::vector<double>&)>;

struct OptimizeOptions {
  int max_iter = 10000;
  double tolerance = 1e-6;
  double initial_step = 0.5;
};

struct OptimizationTrace {
  long long iterations = 0;
  long long evaluations = 0;
  std::vector<double> best_params;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::vector<double>, double>> history;  // every evaluation
  bool converged = false;
};

namespace detail {

inline double traced_eval(const Objective& f, const std::vector<double>& x,
                          OptimizationTrace& trace) {
  const double v = f(x);
  ++trace.evaluations;
  trace.history.emplace_back(x, v);
  if (v < trace.best_value) {
    trace.best_value = v;
    trace.best_params = x;
  }
  return v;
}

}  // namespace detail

// Textbook Nelder-Mead with the standard coefficients (reflect 1, expand 2,
// contract 1/2, shrink 1/2). Terminates when the simplex f-spread drops
// below the tolerance or the iteration cap is hit.
inline OptimizationTrace nelder_mead(const Objective& f, std::vector<double> x0,
                                     const OptimizeOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("need at least one parameter");
  OptimizationTrace trace;

  std::vector<std::vector<double>> xs(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += opt.initial_step;
  std::vector<double> fs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fs[i] = detail::traced_eval(f, xs[i], trace);

  std::vector<std::size_t> order(n + 1);
  for (long long iter = 0; iter < opt.max_iter; ++iter) {
    trace.iterations = iter + 1;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order[0], second = order[n - 1], worst = order[n];
    if (fs[worst] - fs[best] <= opt.tolerance) {
      trace.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += xs[i][d];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d)
        x[d] = centroid[d] + t * (centroid[d] - xs[worst][d]);
      return x;
    };

    const std::vector<double> xr = blend(1.0);
    const double fr = detail::traced_eval(f, xr, trace);
    if (fr < fs[best]) {
      const std::vector<double> xe = blend(2.0);
      const double fe = detail::traced_eval(f, xe, trace);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    if (fr < fs[worst]) {
      const std::vector<double> xc = blend(0.5);  // outside contraction
      const double fc = detail::traced_eval(f, xc, trace);
      if (fc <= fr) {
        xs[worst] = xc;
        fs[worst] = fc;
        continue;
      }
    } else {
      const std::vector<double> xc = blend(-0.5);  // inside contraction
      const double fc = detail::traced_eval(f, xc, trace);
      if (fc < fs[worst]) {
        xs[worst] = xc;
        fs[worst] = fc;
        continue;
      }
    }
    // shrink toward the best vertex
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d)
        xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
      fs[i] = detail::traced_eval(f, xs[i], trace);
    }
  }
  return trace;
}

// COBYLA-style derivative-free descent: build a linear model of the
// objective from probes at trust-region radius rho, step against it, and
// manage the radius the usual way (grow it while steps keep landing, halve
// it when they stop). Deliberately simple; it trades evaluations for
// robustness.
inline OptimizationTrace linear_trust(const Objective& f, std::vector<double> x0,
                                      const OptimizeOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("need at least one parameter");
  OptimizationTrace trace;

  std::vector<double> x = std::move(x0);
  double fx = detail::traced_eval(f, x, trace);
  double rho = opt.initial_step;
  const double rho_max = opt.initial_step * 8.0;
  std::vector<double> grad(n), probe(n);
  for (long long iter = 0; iter < opt.max_iter && rho > opt.tolerance; ++iter) {
    trace.iterations = iter + 1;
    double norm2 = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      probe = x;
      probe[d] += rho;
      grad[d] = (detail::traced_eval(f, probe, trace) - fx) / rho;
      norm2 += grad[d] * grad[d];
    }
    if (norm2 <= 0.0) {
      rho *= 0.5;
      continue;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<double> cand(n);
    for (std::size_t d = 0; d < n; ++d) cand[d] = x[d] - rho * grad[d] * inv;
    const double fc = detail::traced_eval(f, cand, trace);
    if (fc < fx) {
      const double predicted = rho * std::sqrt(norm2);  // linear-model decrease
      const double actual = fx - fc;
      x = std::move(cand);
      fx = fc;
      // grow the radius only while the model stays trustworthy
      if (actual > 0.3 * predicted) rho = std::min(rho * 2.0, rho_max);
    } else {
      rho *= 0.5;
    }
  }
  trace.converged = rho <= opt.tolerance;
  return trace;
}

inline OptimizationTrace minimize(const std::string& method, const Objective& f,
                                  std::vector<double> x0, const OptimizeOptions& opt = {}) {
  if (method == "nelder_mead") return nelder_mead(f, std::move(x0), opt);
  if (method == "cobyla" || method == "linear_trust")
    return linear_trust(f, std::move(x0), opt);
  throw std::invalid_argument("unknown optimizer '" + method +
                              "' (expected nelder_mead or cobyla)");
}

}  // namespace knapq
