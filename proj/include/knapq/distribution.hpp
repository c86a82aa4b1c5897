#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace knapq {

// Shot histogram keyed by rendered bitstring. std::map keeps keys in
// lexicographic order, which downstream tie-breaks rely on.
struct SampleDistribution {
  std::map<std::string, long long> counts;
  long long total_shots = 0;

  void add(const std::string& bitstring, long long n = 1) {
    counts[bitstring] += n;
    total_shots += n;
  }

  double probability(const std::string& bitstring) const {
    if (total_shots == 0) return 0.0;
    const auto it = counts.find(bitstring);
    return it == counts.end()
               ? 0.0
               : static_cast<double>(it->second) / static_cast<double>(total_shots);
  }
};

}  // namespace knapq
