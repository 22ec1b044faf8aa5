#ifndef UAD_FUSION_FUSION_HPP
#define UAD_FUSION_FUSION_HPP

#include <cmath>
#include <vector>

#include "uad/core/linalg.hpp"
#include "uad/geom/camera.hpp"
#include "uad/geom/point_cloud.hpp"

namespace uad::fusion {

/// Dense per-pixel features of one view, H×W×d, already at image resolution.
using ViewFeatures = Grid<float>;

/// Per-point fused features over an object cloud.
struct FeatureField {
  RowMatrix features;              // N×d; rows of unseen points are zero
  std::vector<int> visible_count;  // views each point was visible in

  [[nodiscard]] std::size_t size() const { return visible_count.size(); }
  [[nodiscard]] int dim() const { return static_cast<int>(features.cols()); }
  [[nodiscard]] bool valid(std::size_t n) const { return visible_count[n] > 0; }
  [[nodiscard]] std::size_t valid_count() const {
    std::size_t k = 0;
    for (int c : visible_count) k += c > 0 ? 1 : 0;
    return k;
  }
};

struct Visibility {
  bool visible = false;
  int row = -1;
  int col = -1;
};

/// A point is visible in a view when it projects inside the image onto a
/// valid-depth pixel whose depth reading agrees with the projected depth
/// within `tolerance` meters. The pixel is reported whenever it is inside
/// the image, visible or not.
inline Visibility visibility_test(const Eigen::Vector3d& point, const geom::CameraView& view,
                                  double tolerance) {
  if (!(tolerance > 0.0)) throw Error("fusion", "visibility tolerance must be > 0");
  Visibility out;
  const auto pr = geom::project(view, point);
  if (!pr) return out;
  const int r = pr->row(), c = pr->col();
  if (!view.depth.inside(r, c)) return out;
  out.row = r;
  out.col = c;
  const double d = view.depth.at(r, c);
  out.visible = d > 0.0 && std::abs(pr->z - d) <= tolerance;
  return out;
}

struct FusionConfig {
  double tolerance = 0.005;  // meters
};

/// Mean of each point's nearest-pixel feature over the views it is visible in.
/// Per point, contributions are summed in ascending view order, then divided
/// by the count once.
inline FeatureField fuse_features(const geom::PointCloud& cloud,
                                  const std::vector<geom::CameraView>& views,
                                  const std::vector<ViewFeatures>& feats,
                                  const FusionConfig& cfg = {}) {
  if (views.empty() || views.size() != feats.size())
    throw Error("fusion", "views and feature maps must be aligned and nonempty");
  const int d = feats.front().channels;
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (feats[i].channels != d) throw Error("fusion", "feature dimension differs across views");
    if (!feats[i].same_shape(views[i].depth))
      throw Error("fusion", "feature map size does not match its view");
  }

  FeatureField field;
  field.features = RowMatrix::Zero(static_cast<Eigen::Index>(cloud.size()), d);
  field.visible_count.assign(cloud.size(), 0);
  for (std::size_t n = 0; n < cloud.size(); ++n) {
    auto row = field.features.row(static_cast<Eigen::Index>(n));
    int count = 0;
    for (std::size_t v = 0; v < views.size(); ++v) {
      const Visibility vis = visibility_test(cloud.points[n], views[v], cfg.tolerance);
      if (!vis.visible) continue;
      const auto px = feats[v].pixel(vis.row, vis.col);
      for (int k = 0; k < d; ++k) row[k] += static_cast<double>(px[k]);
      ++count;
    }
    field.visible_count[n] = count;
    if (count > 0) row /= static_cast<double>(count);
  }
  return field;
}

}  // namespace uad::fusion

#endif  // UAD_FUSION_FUSION_HPP
