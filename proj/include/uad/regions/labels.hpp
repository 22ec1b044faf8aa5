#ifndef UAD_REGIONS_LABELS_HPP
#define UAD_REGIONS_LABELS_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

namespace uad::regions {

/// Renumbers cluster ids to 0..K-1 ordered by descending cluster size, ties
/// broken by the smallest member index. Negative ids are left untouched.
inline int canonicalize(std::vector<int>& labels) {
  std::map<int, std::pair<std::size_t, std::size_t>> stats;  // id -> (size, first index)
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    auto [it, fresh] = stats.try_emplace(labels[i], 0, i);
    ++it->second.first;
  }
  std::vector<std::pair<int, std::pair<std::size_t, std::size_t>>> order(stats.begin(), stats.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });
  std::map<int, int> remap;
  for (std::size_t k = 0; k < order.size(); ++k) remap[order[k].first] = static_cast<int>(k);
  for (int& l : labels)
    if (l >= 0) l = remap[l];
  return static_cast<int>(order.size());
}

}  // namespace uad::regions

#endif  // UAD_REGIONS_LABELS_HPP
