#ifndef UAD_IO_HEATMAP_HPP
#define UAD_IO_HEATMAP_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "uad/core/grid.hpp"

namespace uad::io {

/// Viridis colormap, polynomial fit. t in [0,1].
inline std::array<std::uint8_t, 3> viridis(double t) {
  t = std::clamp(t, 0.0, 1.0);
  static constexpr double c[7][3] = {
      {0.2777273272234177, 0.005407344544966578, 0.3340998053353061},
      {0.1050930431085774, 1.404613529898575, 1.384590162594685},
      {-0.3308618287255563, 0.214847559468213, 0.09509516302823659},
      {-4.634230498983486, -5.799100973351585, -19.33244095627987},
      {6.228269936347081, 14.17993336680509, 56.69055260068105},
      {4.776384997670288, -13.74514537774601, -65.35303263337234},
      {-5.435455855934631, 4.645852612178535, 26.3124352495832},
  };
  std::array<std::uint8_t, 3> out{};
  for (int k = 0; k < 3; ++k) {
    double v = c[6][k];
    for (int i = 5; i >= 0; --i) v = c[i][k] + t * v;
    out[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  }
  return out;
}

/// Renders a [0,1] map as RGB with a vertical value-scale strip on the right
/// (top = 1, bottom = 0). For figures only.
inline Rgb render_heatmap(const Map& m, int strip = 6, int gap = 2) {
  Rgb out(m.height, m.width + gap + strip, 3, 255);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const auto col = viridis(m.at(r, c));
      for (int k = 0; k < 3; ++k) out.at(r, c, k) = col[static_cast<std::size_t>(k)];
    }
    const double t = m.height > 1 ? 1.0 - static_cast<double>(r) / (m.height - 1) : 1.0;
    const auto col = viridis(t);
    for (int c = m.width + gap; c < out.width; ++c)
      for (int k = 0; k < 3; ++k) out.at(r, c, k) = col[static_cast<std::size_t>(k)];
  }
  return out;
}

}  // namespace uad::io

#endif  // UAD_IO_HEATMAP_HPP
