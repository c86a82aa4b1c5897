#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace knapq {

// Entry i of a Bits vector is variable/qubit i. Rendered bitstrings put
// index 0 in the leftmost character; basis-state indices use index 0 as the
// least significant bit. Both conventions are relied on throughout.
using Bits = std::vector<std::uint8_t>;

inline std::string to_bitstring(const Bits& bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s[i] = '1';
  return s;
}

inline Bits bits_from_string(const std::string& s) {
  Bits b(s.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      b[i] = 1;
    else if (s[i] != '0')
      throw std::invalid_argument("bitstring contains character '" +
                                  std::string(1, s[i]) + "'");
  }
  return b;
}

inline Bits bits_from_index(std::uint64_t k, int n) {
  Bits b(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = (k >> i) & 1u;
  return b;
}

inline std::uint64_t index_from_bits(const Bits& b) {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i]) k |= (std::uint64_t{1} << i);
  return k;
}

}  // namespace knapq
