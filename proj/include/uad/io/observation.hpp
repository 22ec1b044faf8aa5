#ifndef UAD_IO_OBSERVATION_HPP
#define UAD_IO_OBSERVATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "uad/core/linalg.hpp"
#include "uad/geom/camera.hpp"

namespace uad::io {

struct WorkspaceBounds {
  Eigen::Vector3d min = Eigen::Vector3d::Constant(-1.0);
  Eigen::Vector3d max = Eigen::Vector3d::Constant(1.0);
};

/// Channel order of every packed view.
enum Channel : int { kAffordance = 0, kDepth, kX, kY, kZ, kRow, kCol, kChannelCount };

inline const std::vector<std::string> kChannelNames{"affordance", "depth", "x", "y", "z", "row", "col"};

/// Policy input for one timestep: a channel stack per view plus proprioception.
struct ObservationPack {
  std::vector<Grid<double>> views;  // H×W×kChannelCount
  Vec proprio;
  WorkspaceBounds bounds;
};

/// Affordance 2a-1, per-pixel world xyz clipped to the workspace, depth zeroed
/// where the unclipped point was outside the workspace (or unobserved), and
/// normalized row/column coordinates in [-1,1].
inline ObservationPack pack_observation(const std::vector<geom::CameraView>& views,
                                        const std::vector<Map>& affordance,
                                        const WorkspaceBounds& bounds, const Vec& proprio) {
  if ((bounds.min.array() >= bounds.max.array()).any())
    throw Error("observation", "workspace bounds need min < max on every axis");
  if (views.size() != affordance.size()) throw Error("observation", "one affordance map per view required");
  ObservationPack pack;
  pack.bounds = bounds;
  pack.proprio = proprio;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto& view = views[v];
    const int h = view.height(), w = view.width();
    if (!affordance[v].same_shape(h, w)) throw Error("observation", "affordance map does not match its view");
    Grid<double> g(h, w, kChannelCount);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const double z = view.depth.at(r, c);
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        bool inside = false;
        if (z > 0.0) {
          p = geom::unproject_pixel(view, r, c, z);
          inside = ((p.array() >= bounds.min.array()) && (p.array() <= bounds.max.array())).all();
        }
        const Eigen::Vector3d clipped = p.cwiseMax(bounds.min).cwiseMin(bounds.max);
        g.at(r, c, kAffordance) = 2.0 * affordance[v].at(r, c) - 1.0;
        g.at(r, c, kDepth) = inside ? z : 0.0;
        g.at(r, c, kX) = clipped.x();
        g.at(r, c, kY) = clipped.y();
        g.at(r, c, kZ) = clipped.z();
        g.at(r, c, kRow) = h > 1 ? -1.0 + 2.0 * r / (h - 1) : 0.0;
        g.at(r, c, kCol) = w > 1 ? -1.0 + 2.0 * c / (w - 1) : 0.0;
      }
    pack.views.push_back(std::move(g));
  }
  return pack;
}

struct CropWindow {
  int row = 0, col = 0, height = 0, width = 0;
};

/// Window of size round(crop·H)×round(crop·W) at a seeded random offset.
inline CropWindow crop_window(int h, int w, double crop, std::mt19937_64& rng) {
  CropWindow win;
  win.height = std::clamp(static_cast<int>(std::lround(crop * h)), 1, h);
  win.width = std::clamp(static_cast<int>(std::lround(crop * w)), 1, w);
  win.row = std::uniform_int_distribution<int>(0, h - win.height)(rng);
  win.col = std::uniform_int_distribution<int>(0, w - win.width)(rng);
  return win;
}

/// Crops every view to its own random window; all channels of a view share it.
inline ObservationPack random_crop_augment(const ObservationPack& pack, double crop, std::uint64_t seed,
                                           std::vector<CropWindow>* windows = nullptr) {
  if (!(crop > 0.0) || crop > 1.0) throw Error("observation", "crop fraction must be in (0, 1]");
  std::mt19937_64 rng(seed);
  ObservationPack out = pack;
  if (windows) windows->clear();
  for (auto& g : out.views) {
    const CropWindow win = crop_window(g.height, g.width, crop, rng);
    if (windows) windows->push_back(win);
    Grid<double> cropped(win.height, win.width, g.channels);
    for (int r = 0; r < win.height; ++r)
      for (int c = 0; c < win.width; ++c)
        for (int k = 0; k < g.channels; ++k) cropped.at(r, c, k) = g.at(win.row + r, win.col + c, k);
    g = std::move(cropped);
  }
  return out;
}

}  // namespace uad::io

#endif  // UAD_IO_OBSERVATION_HPP
