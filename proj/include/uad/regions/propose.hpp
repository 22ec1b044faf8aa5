#ifndef UAD_REGIONS_PROPOSE_HPP
#define UAD_REGIONS_PROPOSE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "uad/core/seed.hpp"
#include "uad/fusion/fusion.hpp"
#include "uad/geom/point_cloud.hpp"
#include "uad/regions/kmeans.hpp"
#include "uad/regions/mean_shift.hpp"
#include "uad/regions/pca.hpp"

namespace uad::regions {

struct RegionConfig {
  double bandwidth_quantile = 0.25;
  std::size_t bandwidth_sample = 512;
  double min_bin_fraction = 0.01;  // mean-shift seed bins need this share of the points
  int min_clusters = 5;  // k-means fallback target for single-link objects
  std::uint64_t seed = 0;
};

/// Region assignment over an object cloud. Labels run 1..num_regions; points
/// that were never visible carry label 0.
struct RegionLabeling {
  std::vector<int> labels;
  int num_regions = 0;
  std::map<int, std::pair<int, int>> per_link;  // link id -> [first, last] label
  bool per_link_path = false;
  bool used_fallback = false;
  int mean_shift_clusters = 0;  // single-link path only

  [[nodiscard]] std::vector<std::size_t> members(int label) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) idx.push_back(i);
    return idx;
  }
  [[nodiscard]] std::vector<int> region_ids() const {
    std::vector<int> ids(static_cast<std::size_t>(num_regions));
    for (int i = 0; i < num_regions; ++i) ids[static_cast<std::size_t>(i)] = i + 1;
    return ids;
  }
};

namespace detail {

struct SubsetClusters {
  std::vector<int> labels;  // aligned with the valid rows passed in, 0-based
  int count = 0;
  int mean_shift_count = 0;
  bool fallback = false;
};

inline SubsetClusters cluster_rows(const fusion::FeatureField& field,
                                   const std::vector<std::size_t>& rows, const RegionConfig& cfg,
                                   bool allow_fallback, std::uint64_t seed) {
  SubsetClusters out;
  const auto n = rows.size();
  if (n == 0) return out;
  auto single = [&] {
    out.labels.assign(n, 0);
    out.count = 1;
  };
  if (n < 3) {
    if (!allow_fallback) return single(), out;
    RowMatrix raw(static_cast<Eigen::Index>(n), field.dim());
    for (std::size_t i = 0; i < n; ++i) raw.row(static_cast<Eigen::Index>(i)) = field.features.row(static_cast<Eigen::Index>(rows[i]));
    const auto km = kmeans(raw, static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(cfg.min_clusters))), seed);
    out.labels = km.labels;
    out.count = km.k_used;
    out.fallback = true;
    return out;
  }

  const ReducedField red = pca_reduce(field, 3, &rows);
  if (red.explained_variance.maxCoeff() <= 0.0) return single(), out;

  RowMatrix coords(static_cast<Eigen::Index>(n), red.coords.cols());
  for (std::size_t i = 0; i < n; ++i) coords.row(static_cast<Eigen::Index>(i)) = red.coords.row(static_cast<Eigen::Index>(rows[i]));

  const double bw = estimate_bandwidth(coords, cfg.bandwidth_quantile, cfg.bandwidth_sample, seed);
  const auto min_bin = static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.min_bin_fraction * static_cast<double>(n))));
  MeanShiftResult ms = mean_shift(coords, bw, 300, min_bin);
  out.mean_shift_count = ms.count;
  if (allow_fallback && ms.count < cfg.min_clusters) {
    const int k = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(cfg.min_clusters)));
    KMeansResult km = kmeans(coords, k, seed);
    out.labels = std::move(km.labels);
    out.count = km.k_used;
    out.fallback = true;
    return out;
  }
  out.labels = std::move(ms.labels);
  out.count = ms.count;
  return out;
}

}  // namespace detail

/// Candidate regions for an object.
///
/// Objects with two or more links are clustered link by link (PCA and mean
/// shift per link, no fallback) with labels offset in ascending link order.
/// Otherwise mean shift runs on the PCA-reduced field and, when it finds fewer
/// than `min_clusters` clusters, k-means with `min_clusters` replaces it.
inline RegionLabeling propose_regions(const fusion::FeatureField& field,
                                      const geom::PointCloud& cloud,
                                      const RegionConfig& cfg = {}) {
  if (field.size() != cloud.size()) throw Error("regions", "field and cloud sizes differ");
  RegionLabeling out;
  out.labels.assign(field.size(), 0);

  std::vector<int> links;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (field.valid(i) && cloud.link_id[i] >= 0) links.push_back(cloud.link_id[i]);
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());

  if (links.size() >= 2) {
    out.per_link_path = true;
    for (int link : links) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < cloud.size(); ++i)
        if (field.valid(i) && cloud.link_id[i] == link) rows.push_back(i);
      const auto sub = detail::cluster_rows(field, rows, cfg, false,
                                            derive_seed(cfg.seed, "regions/link/" + std::to_string(link)));
      const int offset = out.num_regions;
      for (std::size_t i = 0; i < rows.size(); ++i) out.labels[rows[i]] = offset + sub.labels[i] + 1;
      out.per_link[link] = {offset + 1, offset + sub.count};
      out.num_regions += sub.count;
    }
    return out;
  }

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < field.size(); ++i)
    if (field.valid(i)) rows.push_back(i);
  const auto sub = detail::cluster_rows(field, rows, cfg, true, derive_seed(cfg.seed, "regions"));
  for (std::size_t i = 0; i < rows.size(); ++i) out.labels[rows[i]] = sub.labels[i] + 1;
  out.num_regions = sub.count;
  out.used_fallback = sub.fallback;
  out.mean_shift_clusters = sub.mean_shift_count;
  if (!links.empty() && out.num_regions > 0) out.per_link[links.front()] = {1, out.num_regions};
  return out;
}

}  // namespace uad::regions

#endif  // UAD_REGIONS_PROPOSE_HPP
