#ifndef UAD_GEOM_POINT_CLOUD_HPP
#define UAD_GEOM_POINT_CLOUD_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "uad/geom/camera.hpp"

namespace uad::geom {

/// Object point cloud in world coordinates with per-point provenance.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<int> source_view;   // index of the view the point came from
  std::vector<int> source_pixel;  // row-major pixel index in that view
  std::vector<int> link_id;       // -1 when the scene has no link labels

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] bool empty() const { return points.empty(); }

  void push_back(const Eigen::Vector3d& p, int view, int pixel, int link) {
    points.push_back(p);
    source_view.push_back(view);
    source_pixel.push_back(pixel);
    link_id.push_back(link);
  }

  [[nodiscard]] PointCloud subset(const std::vector<std::size_t>& idx) const {
    PointCloud out;
    for (std::size_t i : idx) out.push_back(points[i], source_view[i], source_pixel[i], link_id[i]);
    return out;
  }

  /// Distinct link ids present, ascending. -1 is not a link.
  [[nodiscard]] std::vector<int> links() const {
    std::vector<int> ids;
    for (int l : link_id)
      if (l >= 0) ids.push_back(l);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }
};

/// One world point per foreground pixel. An empty foreground yields an empty
/// cloud; callers check `empty()`.
inline PointCloud backproject_view(const CameraView& view, int view_index = 0) {
  if (std::abs(view.intrinsics.determinant()) < 1e-12 || !(view.intrinsics(0, 0) > 0.0) ||
      !(view.intrinsics(1, 1) > 0.0))
    throw Error("camera", "intrinsics not invertible");
  PointCloud cloud;
  const bool has_links = !view.link_ids.empty();
  for (int r = 0; r < view.height(); ++r) {
    for (int c = 0; c < view.width(); ++c) {
      if (!view.fg_mask.at(r, c)) continue;
      const double z = view.depth.at(r, c);
      if (!(z > 0.0)) continue;
      cloud.push_back(unproject_pixel(view, r, c, z), view_index, r * view.width() + c,
                      has_links ? view.link_ids.at(r, c) : -1);
    }
  }
  return cloud;
}

/// Union of the backprojected foreground of every view.
inline PointCloud aggregate_scene(const std::vector<CameraView>& views) {
  if (views.empty()) throw Error("scene", "aggregate_scene needs at least one view");
  for (const auto& v : views)
    if (v.height() != views.front().height() || v.width() != views.front().width())
      throw Error("scene", "views have mismatched image sizes");
  PointCloud all;
  for (std::size_t i = 0; i < views.size(); ++i) {
    PointCloud part = backproject_view(views[i], static_cast<int>(i));
    for (std::size_t j = 0; j < part.size(); ++j)
      all.push_back(part.points[j], part.source_view[j], part.source_pixel[j], part.link_id[j]);
  }
  return all;
}

namespace detail {

inline std::size_t count_voxels(const PointCloud& cloud, const Eigen::Vector3d& origin, double size,
                                std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>,
                                         std::vector<std::size_t>>* cells) {
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::vector<std::size_t>> local;
  auto& out = cells ? *cells : local;
  out.clear();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d q = (cloud.points[i] - origin) / size;
    out[{static_cast<std::int64_t>(std::floor(q.x())), static_cast<std::int64_t>(std::floor(q.y())),
         static_cast<std::int64_t>(std::floor(q.z()))}]
        .push_back(i);
  }
  return out.size();
}

}  // namespace detail

/// Voxel-grid downsampling to roughly `target_n` points.
///
/// The voxel edge is bisected (in log space) until the occupied-voxel count is
/// within ±10% of the target. Each voxel contributes the original point closest
/// to its centroid, so every kept point exists in the input. Kept points retain
/// input order. Clouds no larger than the target pass through unchanged.
inline PointCloud downsample(const PointCloud& cloud, std::size_t target_n) {
  if (target_n == 0) throw Error("downsample", "target_n must be >= 1");
  if (cloud.size() <= target_n) return cloud;

  Eigen::Vector3d lo = cloud.points.front(), hi = cloud.points.front();
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = std::max((hi - lo).norm(), 1e-12);
  const auto tol_lo = static_cast<double>(target_n) * 0.9;
  const auto tol_hi = static_cast<double>(target_n) * 1.1;

  // Smaller voxels -> more cells. Bisect log(size) between a tiny edge and the diagonal.
  double log_small = std::log(diag * 1e-7), log_large = std::log(diag * 2.0);
  double best_size = diag;
  double best_err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (log_small + log_large);
    const double size = std::exp(mid);
    const auto n = static_cast<double>(detail::count_voxels(cloud, lo, size, nullptr));
    const double err = std::abs(n - static_cast<double>(target_n));
    if (err < best_err) {
      best_err = err;
      best_size = size;
    }
    if (n >= tol_lo && n <= tol_hi) break;
    if (n > target_n) log_small = mid; else log_large = mid;
  }

  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::vector<std::size_t>> cells;
  detail::count_voxels(cloud, lo, best_size, &cells);
  std::vector<std::size_t> keep;
  keep.reserve(cells.size());
  for (const auto& [key, members] : cells) {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (std::size_t i : members) centroid += cloud.points[i];
    centroid /= static_cast<double>(members.size());
    std::size_t best = members.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i : members) {
      const double d = (cloud.points[i] - centroid).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    keep.push_back(best);
  }
  std::sort(keep.begin(), keep.end());
  return cloud.subset(keep);
}

}  // namespace uad::geom

#endif  // UAD_GEOM_POINT_CLOUD_HPP
