#ifndef UAD_REGIONS_AGREEMENT_HPP
#define UAD_REGIONS_AGREEMENT_HPP

#include <map>
#include <utility>
#include <vector>

#include "uad/core/error.hpp"

namespace uad::regions {

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error("ari", "labelings differ in length");
  const auto n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto c2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, m] : table) index += c2(m);
  for (const auto& [key, m] : rows) sa += c2(m);
  for (const auto& [key, m] : cols) sb += c2(m);
  const double expected = sa * sb / c2(n);
  const double maximum = 0.5 * (sa + sb);
  if (maximum == expected) return 1.0;  // both trivial partitions
  return (index - expected) / (maximum - expected);
}

}  // namespace uad::regions

#endif  // UAD_REGIONS_AGREEMENT_HPP
