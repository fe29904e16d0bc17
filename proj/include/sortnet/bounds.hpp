#pragma once

#include <array>
#include <bit>
#include <map>
#include <stdexcept>
#include <vector>

namespace sortnet {

/// Best published sorting-network sizes by channel count (index = n, 1..16).
inline constexpr std::array<int, 17> kUpperBounds = {-1, 0,  1,  3,  5,  9,  12, 16, 19,
                                                     25, 29, 35, 39, 45, 51, 56, 60};

struct BoundsRow {
  int n = 0;
  int lower = -1;  // -1: nothing derivable
  int upper = -1;  // -1: outside the published table
};

inline int ceil_log2(int x) {
  if (x < 1) throw std::invalid_argument("ceil_log2 needs a positive argument");
  return std::bit_width(static_cast<unsigned>(x - 1));
}

/// Propagate S(n+1) >= S(n) + ceil(log2 n) (van Voorhis) upward from known
/// exact sizes. Anchors are taken as exact, so they seed both bounds.
inline std::vector<BoundsRow> derive_lower_bounds(const std::map<int, int>& known, int n_max) {
  if (known.empty()) throw std::invalid_argument("need at least one exact size as an anchor");
  for (const auto& [n, size] : known)
    if (n < 1 || size < 0) throw std::invalid_argument("invalid anchor");
  std::vector<BoundsRow> rows;
  int carried = -1;
  for (int n = 1; n <= n_max; ++n) {
    BoundsRow row;
    row.n = n;
    row.upper = n <= 16 ? kUpperBounds[static_cast<std::size_t>(n)] : -1;
    if (auto it = known.find(n); it != known.end())
      row.lower = it->second;
    else if (carried >= 0)
      row.lower = carried + ceil_log2(n - 1);
    if (row.lower >= 0 && row.upper >= 0 && row.lower > row.upper)
      throw std::logic_error("derived lower bound exceeds the known upper bound at n=" +
                             std::to_string(n));
    carried = row.lower;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sortnet
