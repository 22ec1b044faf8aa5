#ifndef UAD_REGIONS_OVERLAY_HPP
#define UAD_REGIONS_OVERLAY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "uad/geom/raster.hpp"
#include "uad/regions/propose.hpp"

namespace uad::regions {

using Color = std::array<std::uint8_t, 3>;

/// Fixed 20-colour palette: ten saturated hues followed by their light variants.
inline constexpr std::array<Color, 20> kPalette{{
    {31, 119, 180},  {255, 127, 14},  {44, 160, 44},   {214, 39, 40},   {148, 103, 189},
    {140, 86, 75},   {227, 119, 194}, {127, 127, 127}, {188, 189, 34},  {23, 190, 207},
    {174, 199, 232}, {255, 187, 120}, {152, 223, 138}, {255, 152, 150}, {197, 176, 213},
    {196, 156, 148}, {247, 182, 210}, {199, 199, 199}, {219, 219, 141}, {158, 218, 229},
}};

inline Color region_color(int label) {
  return kPalette[static_cast<std::size_t>((label - 1) % static_cast<int>(kPalette.size()))];
}

inline constexpr double kOverlayAlpha = 0.6;

struct LegendEntry {
  int label = 0;
  Color color{};
  std::size_t point_count = 0;
};

struct RegionOverlay {
  Rgb image;
  LabelMap pixel_labels;  // 0 on background
  std::vector<LegendEntry> legend;
};

/// Colours every foreground pixel by the region of its nearest cloud point and
/// alpha-blends the colour over the view's RGB image. Background pixels keep
/// their original colour.
inline RegionOverlay render_region_overlay(const RegionLabeling& labeling,
                                           const geom::CameraView& view,
                                           const geom::SpatialIndex& index,
                                           double alpha = kOverlayAlpha) {
  RegionOverlay out;
  out.pixel_labels = geom::label_pixels_by_nn<int>(view, index, labeling.labels, 0);
  const int h = view.height(), w = view.width();
  out.image = view.rgb.empty() ? Rgb(h, w, 3, 128) : view.rgb;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const int label = out.pixel_labels.at(r, c);
      if (label <= 0) continue;
      const Color col = region_color(label);
      for (int k = 0; k < 3; ++k) {
        const double v = alpha * col[static_cast<std::size_t>(k)] + (1.0 - alpha) * out.image.at(r, c, k);
        out.image.at(r, c, k) = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  for (int label = 1; label <= labeling.num_regions; ++label) {
    LegendEntry e{label, region_color(label), 0};
    for (int l : labeling.labels) e.point_count += l == label ? 1 : 0;
    out.legend.push_back(e);
  }
  return out;
}

/// Recovers the palette region label painted at one overlay pixel, given the
/// original pixel colour. Returns the palette slot (0-based), or -1 when the
/// pixel does not look like an overlay colour.
inline int decode_overlay_slot(const std::uint8_t* overlay_px, const std::uint8_t* original_px,
                               double alpha = kOverlayAlpha, double max_err = 12.0) {
  double color[3];
  for (int k = 0; k < 3; ++k) color[k] = (overlay_px[k] - (1.0 - alpha) * original_px[k]) / alpha;
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < kPalette.size(); ++s) {
    double d = 0.0;
    for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(color[k] - kPalette[s][static_cast<std::size_t>(k)]));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(s);
    }
  }
  return best_d <= max_err ? best : -1;
}

}  // namespace uad::regions

#endif  // UAD_REGIONS_OVERLAY_HPP
