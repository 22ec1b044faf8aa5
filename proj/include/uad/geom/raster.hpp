#ifndef UAD_GEOM_RASTER_HPP
#define UAD_GEOM_RASTER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "uad/geom/camera.hpp"
#include "uad/geom/kdtree.hpp"
#include "uad/geom/point_cloud.hpp"

namespace uad::geom {

struct ProjectedMap {
  Map values;     // 0 where not covered
  Mask coverage;  // 1 where some point landed
};

/// Splats per-point values into a view. When several points land on one pixel
/// the one with the smallest camera-frame depth wins.
inline ProjectedMap project_points(const PointCloud& cloud, const CameraView& view,
                                   std::span<const double> values) {
  if (values.size() != cloud.size()) throw Error("project", "values length != point count");
  const int h = view.height(), w = view.width();
  ProjectedMap out{Map(h, w), Mask(h, w)};
  std::vector<double> zbuf(static_cast<std::size_t>(h) * w, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto pr = project(view, cloud.points[i]);
    if (!pr) continue;
    const int r = pr->row(), c = pr->col();
    if (r < 0 || c < 0 || r >= h || c >= w) continue;
    const std::size_t px = static_cast<std::size_t>(r) * w + c;
    if (pr->z < zbuf[px]) {
      zbuf[px] = pr->z;
      out.values[px] = values[i];
      out.coverage[px] = 1;
    }
  }
  return out;
}

/// For every foreground pixel, the value of the cloud point nearest to the
/// pixel's backprojected 3D location. Background pixels get `background`.
template <typename T>
Grid<T> label_pixels_by_nn(const CameraView& view, const SpatialIndex& index,
                           std::span<const T> per_point, T background = T{}) {
  if (index.size() == 0) throw Error("label", "cannot label pixels against an empty cloud");
  if (per_point.size() != index.size()) throw Error("label", "per-point values length != cloud size");
  Grid<T> out(view.height(), view.width(), 1, background);
  for (int r = 0; r < view.height(); ++r) {
    for (int c = 0; c < view.width(); ++c) {
      if (!view.fg_mask.at(r, c)) continue;
      const double z = view.depth.at(r, c);
      if (!(z > 0.0)) continue;
      out.at(r, c) = per_point[index.nearest(unproject_pixel(view, r, c, z)).index];
    }
  }
  return out;
}

/// Corner-aligned bilinear resize of an h×w×d grid to out_h×out_w×d.
/// Output samples that coincide with input samples reproduce them exactly.
template <typename T>
Grid<T> bilinear_upsample(const Grid<T>& in, int out_h, int out_w) {
  if (in.height < 1 || in.width < 1) throw Error("upsample", "input grid is empty");
  Grid<T> out(out_h, out_w, in.channels);
  auto src = [](int i, int n_out, int n_in) {
    return n_out > 1 ? static_cast<double>(i) * (n_in - 1) / (n_out - 1) : 0.0;
  };
  for (int r = 0; r < out_h; ++r) {
    const double y = src(r, out_h, in.height);
    const int y0 = std::min(static_cast<int>(std::floor(y)), in.height - 1);
    const int y1 = std::min(y0 + 1, in.height - 1);
    const double fy = y - y0;
    for (int c = 0; c < out_w; ++c) {
      const double x = src(c, out_w, in.width);
      const int x0 = std::min(static_cast<int>(std::floor(x)), in.width - 1);
      const int x1 = std::min(x0 + 1, in.width - 1);
      const double fx = x - x0;
      for (int k = 0; k < in.channels; ++k) {
        if (fx == 0.0 && fy == 0.0) {
          out.at(r, c, k) = in.at(y0, x0, k);
          continue;
        }
        const double top = (1.0 - fx) * in.at(y0, x0, k) + fx * in.at(y0, x1, k);
        const double bot = (1.0 - fx) * in.at(y1, x0, k) + fx * in.at(y1, x1, k);
        out.at(r, c, k) = static_cast<T>((1.0 - fy) * top + fy * bot);
      }
    }
  }
  return out;
}

}  // namespace uad::geom

#endif  // UAD_GEOM_RASTER_HPP
