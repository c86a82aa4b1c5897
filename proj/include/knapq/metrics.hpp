#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "knapq/bits.hpp"
#include "knapq/distribution.hpp"
#include "knapq/qubo.hpp"
#include "knapq/report.hpp"

namespace knapq {

// A bitstring is a valid solution iff both penalty components vanish
// exactly. The breakdown is computed in integer arithmetic, so the == 0
// comparison needs no tolerance.
inline bool is_valid(const QuboModel& m, const Bits& x) {
  const PenaltyBreakdown pb = penalty_breakdown(m, x);
  return pb.single == 0 && pb.capacity == 0;
}

inline bool is_valid(const QuboModel& m, const std::string& bitstring) {
  return is_valid(m, bits_from_string(bitstring));
}

struct BestSample {
  std::string bitstring;
  double energy = 0.0;
  bool valid = false;
  long long value = 0;
};

namespace detail {

// Lowest-energy entry; energy ties go to the lexicographically smallest
// bitstring, which is the map iteration order.
template <class Map>
BestSample best_sample_impl(const Map& entries, const QuboModel& m) {
  if (entries.empty()) throw std::invalid_argument("empty distribution");
  BestSample best;
  bool first = true;
  for (const auto& [key, weight] : entries) {
    (void)weight;
    const Bits x = bits_from_string(key);
    const double e = m.energy(x);
    if (first || e < best.energy) {
      first = false;
      best.bitstring = key;
      best.energy = e;
      best.valid = is_valid(m, x);
      best.value = total_value(m, x);
    }
  }
  return best;
}

// Threshold compare with a hair of slack so integer ratios that land
// exactly on the limit are not lost to binary rounding of c_lim.
inline bool above_limit(long long value, long long v_opt, double c_lim) {
  return 100.0 * static_cast<double>(value) / static_cast<double>(v_opt) >=
         100.0 * c_lim - 1e-9;
}

template <class Map, class ProbOf>
double overlap_impl(const Map& entries, ProbOf prob_of, const QuboModel& m, long long v_opt,
                    double c_lim) {
  if (v_opt <= 0) throw std::invalid_argument("overlap needs a positive optimal value");
  double acc = 0.0;
  for (const auto& [key, weight] : entries) {
    const Bits x = bits_from_string(key);
    if (!is_valid(m, x)) continue;
    if (!above_limit(total_value(m, x), v_opt, c_lim)) continue;
    acc += std::sqrt(prob_of(weight));
  }
  return acc;
}

}  // namespace detail

inline BestSample best_sample(const SampleDistribution& d, const QuboModel& m) {
  return detail::best_sample_impl(d.counts, m);
}

inline BestSample best_sample(const std::map<std::string, double>& probs, const QuboModel& m) {
  return detail::best_sample_impl(probs, m);
}

// Per-run closeness-to-optimum contribution, in percent. The run is
// excluded (nullopt) when the lowest-energy sample is invalid.
inline std::optional<double> closeness(const SampleDistribution& d, const QuboModel& m,
                                       long long v_opt) {
  if (v_opt <= 0) throw std::invalid_argument("closeness needs a positive optimal value");
  const BestSample best = best_sample(d, m);
  if (!best.valid) return std::nullopt;
  return 100.0 * static_cast<double>(best.value) / static_cast<double>(v_opt);
}

// Per-run overlap with near-optimal solutions: sum of sqrt(probability)
// over valid samples whose value reaches c_lim of the optimum.
inline double overlap_90(const SampleDistribution& d, const QuboModel& m, long long v_opt,
                         double c_lim = 0.90) {
  const double total = static_cast<double>(d.total_shots);
  return detail::overlap_impl(
      d.counts, [total](long long c) { return static_cast<double>(c) / total; }, m, v_opt,
      c_lim);
}

inline double overlap_90(const std::map<std::string, double>& probs, const QuboModel& m,
                         long long v_opt, double c_lim = 0.90) {
  return detail::overlap_impl(probs, [](double p) { return p; }, m, v_opt, c_lim);
}

// Cross-run aggregate: means and population standard deviations, with
// invalid-best runs excluded from the closeness average and surfaced via
// valid_runs. A metric with zero contributing runs is reported absent.
struct QualityReport {
  int n_run = 0;
  int valid_runs = 0;
  double c_lim = 0.90;
  std::string best_bitstring;
  bool best_valid = false;
  double best_energy = 0.0;
  long long best_value = 0;
  std::optional<double> c_opt_mean, c_opt_std;
  std::optional<double> o90_mean, o90_std;
  double n_iter_mean = 0.0;
  std::vector<double> c_opt_runs;  // contributing runs only
  std::vector<double> o90_runs;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  bool all_equal = true;
  for (double x : xs) all_equal = all_equal && x == xs.front();
  if (all_equal) return {xs.front(), 0.0};  // deterministic runs spread exactly 0
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(std::max(0.0, var))};
}

}  // namespace detail

inline QualityReport aggregate(const std::vector<RunReport>& runs, double c_lim = 0.90) {
  if (runs.empty()) throw std::invalid_argument("aggregate needs at least one run");
  QualityReport q;
  q.n_run = static_cast<int>(runs.size());
  q.c_lim = c_lim;
  bool first = true;
  double n_iter_sum = 0.0;
  for (const RunReport& r : runs) {
    if (r.c_opt) {
      ++q.valid_runs;
      q.c_opt_runs.push_back(*r.c_opt);
    }
    if (r.o90) q.o90_runs.push_back(*r.o90);
    n_iter_sum += static_cast<double>(r.n_iter);
    const bool better =
        first || r.best_energy < q.best_energy ||
        (r.best_energy == q.best_energy && r.best_bitstring < q.best_bitstring);
    if (better) {
      first = false;
      q.best_bitstring = r.best_bitstring;
      q.best_energy = r.best_energy;
      q.best_valid = r.valid;
      q.best_value = r.best_value;
    }
  }
  q.n_iter_mean = n_iter_sum / static_cast<double>(q.n_run);
  if (!q.c_opt_runs.empty()) {
    const auto [m, s] = detail::mean_std(q.c_opt_runs);
    q.c_opt_mean = m;
    q.c_opt_std = s;
  }
  if (!q.o90_runs.empty()) {
    const auto [m, s] = detail::mean_std(q.o90_runs);
    q.o90_mean = m;
    q.o90_std = s;
  }
  return q;
}

}  // namespace knapq
