#pragma once

#include <optional>
#include <string>
#include <vector>

#include "knapq/distribution.hpp"

namespace knapq {

// One solver run, normalized across solver families. Quality fields that
// need the exact optimum (c_opt) or a sampled distribution (o90) are
// optional; the bench harness fills what applies.
struct RunReport {
  std::string solver_id;
  std::string best_bitstring;
  double best_energy = 0.0;
  bool valid = false;
  long long best_value = 0;
  std::optional<double> c_opt;  // percent; absent when the best sample is invalid
  std::optional<double> o90;    // absent for solvers without a meaningful distribution
  long long n_iter = 0;
  long long evaluations = 0;
  double wall_seconds = 0.0;
  std::vector<double> energy_trace;  // best-so-far, where the solver has one
  std::optional<SampleDistribution> distribution;  // kept only on request (large)
  std::string error;                               // empty on success
};

}  // namespace knapq
