#ifndef UAD_IO_PNG_HPP
#define UAD_IO_PNG_HPP

#include <png.h>

#include <cstdint>
#include <vector>

#include "uad/core/grid.hpp"
#include "uad/io/fs.hpp"

namespace uad::io {

/// Encodes an 8-bit gray (1 channel) or RGB (3 channel) grid as PNG.
inline std::vector<std::uint8_t> encode_png(const Grid<std::uint8_t>& img) {
  if (img.channels != 1 && img.channels != 3) throw Error("png", "PNG export needs 1 or 3 channels");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data.data(), 0, nullptr))
    throw Error("png", image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data.data(), 0, nullptr))
    throw Error("png", image.message);
  out.resize(size);
  return out;
}

/// Decodes a PNG to 8-bit RGB (channels = 3) or gray (channels = 1).
inline Grid<std::uint8_t> decode_png(std::span<const std::uint8_t> bytes, int channels = 3) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) throw Error("png", image.message);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Grid<std::uint8_t> out(static_cast<int>(image.height), static_cast<int>(image.width), channels);
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error("png", image.message);
  }
  return out;
}

inline void write_png(const fs::path& path, const Grid<std::uint8_t>& img) { atomic_write(path, encode_png(img)); }

inline Grid<std::uint8_t> read_png(const fs::path& path, int channels = 3) {
  const auto bytes = read_bytes(path);
  return decode_png(bytes, channels);
}

}  // namespace uad::io

#endif  // UAD_IO_PNG_HPP
