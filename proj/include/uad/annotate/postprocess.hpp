#ifndef UAD_ANNOTATE_POSTPROCESS_HPP
#define UAD_ANNOTATE_POSTPROCESS_HPP

#include <algorithm>
#include <array>
#include <cmath>

#include "uad/core/grid.hpp"

namespace uad::annotate {

struct PostprocessConfig {
  double threshold = 0.5;
  double sigma = 0.8;  // 3×3 Gaussian
};

/// Normalized 3-tap Gaussian weights {side, center, side}.
inline std::array<double, 3> gaussian3(double sigma) {
  const double side = std::exp(-1.0 / (2.0 * sigma * sigma));
  const double sum = 1.0 + 2.0 * side;
  return {side / sum, 1.0 / sum, side / sum};
}

/// Zeroes values strictly below the threshold, applies a separable 3×3
/// Gaussian blur with zero padding, then clamps to [0,1].
inline Map postprocess_map(const Map& in, const PostprocessConfig& cfg = {}) {
  const int h = in.height, w = in.width;
  Map t(h, w);
  for (std::size_t i = 0; i < in.pixels(); ++i) t[i] = in[i] < cfg.threshold ? 0.0 : in[i];
  const auto k = gaussian3(cfg.sigma);
  Map tmp(h, w), out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      for (int d = -1; d <= 1; ++d)
        if (c + d >= 0 && c + d < w) s += k[static_cast<std::size_t>(d + 1)] * t.at(r, c + d);
      tmp.at(r, c) = s;
    }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      for (int d = -1; d <= 1; ++d)
        if (r + d >= 0 && r + d < h) s += k[static_cast<std::size_t>(d + 1)] * tmp.at(r + d, c);
      out.at(r, c) = std::clamp(s, 0.0, 1.0);
    }
  return out;
}

}  // namespace uad::annotate

#endif  // UAD_ANNOTATE_POSTPROCESS_HPP
