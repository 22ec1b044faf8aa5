#ifndef UAD_CORE_GRID_HPP
#define UAD_CORE_GRID_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace uad {

/// Dense row-major H×W×C raster. Used for images, depth maps, masks,
/// per-pixel feature maps and affordance maps alike.
template <typename T>
struct Grid {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<T> data;

  Grid() = default;
  Grid(int h, int w, int c = 1, T fill = T{})
      : height(h), width(w), channels(c) {
    if (h < 0 || w < 0 || c < 1) throw std::invalid_argument("Grid: bad shape");
    data.assign(static_cast<std::size_t>(h) * w * c, fill);
  }

  [[nodiscard]] bool empty() const { return data.empty(); }
  [[nodiscard]] std::size_t pixels() const {
    return static_cast<std::size_t>(height) * width;
  }
  [[nodiscard]] bool same_shape(int h, int w) const {
    return height == h && width == w;
  }
  template <typename U>
  [[nodiscard]] bool same_shape(const Grid<U>& o) const {
    return height == o.height && width == o.width;
  }
  [[nodiscard]] bool inside(int r, int c) const {
    return r >= 0 && c >= 0 && r < height && c < width;
  }

  T& at(int r, int c, int k = 0) {
    return data[(static_cast<std::size_t>(r) * width + c) * channels + k];
  }
  const T& at(int r, int c, int k = 0) const {
    return data[(static_cast<std::size_t>(r) * width + c) * channels + k];
  }
  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }

  std::span<T> pixel(int r, int c) {
    return {data.data() + (static_cast<std::size_t>(r) * width + c) * channels,
            static_cast<std::size_t>(channels)};
  }
  std::span<const T> pixel(int r, int c) const {
    return {data.data() + (static_cast<std::size_t>(r) * width + c) * channels,
            static_cast<std::size_t>(channels)};
  }
};

using Map = Grid<double>;          // scalar map, 1 channel
using Mask = Grid<std::uint8_t>;   // 0 / 1
using Rgb = Grid<std::uint8_t>;    // 3 channels
using LabelMap = Grid<int>;

}  // namespace uad

#endif  // UAD_CORE_GRID_HPP
