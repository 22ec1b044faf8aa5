#ifndef UAD_IO_TENSOR_FILE_HPP
#define UAD_IO_TENSOR_FILE_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "uad/core/grid.hpp"
#include "uad/io/fs.hpp"

namespace uad::io {

// Layout (little-endian):
//   "UADT" | u8 version=1 | u8 dtype | u8 ndim | ndim × u64 dims | payload
// dtype: 1 = float32, 2 = float64, 3 = uint8. Payload is row-major.

enum class DType : std::uint8_t { F32 = 1, F64 = 2, U8 = 3 };

inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr char kTensorMagic[4] = {'U', 'A', 'D', 'T'};

inline std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::F32: return 4;
    case DType::F64: return 8;
    case DType::U8: return 1;
  }
  return 0;
}

enum class TensorErrc { kBadMagic, kBadVersion, kUnsupportedDtype, kTruncated, kTrailingBytes, kShape };

class TensorError : public Error {
 public:
  TensorError(TensorErrc code, const std::string& what) : Error("tensor", what), code_(code) {}
  [[nodiscard]] TensorErrc code() const { return code_; }

 private:
  TensorErrc code_;
};

/// Raw tensor as stored on disk: dtype, shape and little-endian payload bytes.
struct Tensor {
  DType dtype = DType::F64;
  std::vector<std::uint64_t> dims;
  std::vector<std::uint8_t> payload;

  [[nodiscard]] std::uint64_t count() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }

  template <typename T>
  static Tensor from(std::span<const T> values, std::vector<std::uint64_t> dims, DType dtype);

  /// Values converted to T.
  template <typename T>
  [[nodiscard]] std::vector<T> values() const;
};

namespace detail {

template <typename T>
T load_le(const std::uint8_t* p) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

template <typename T>
void store_le(std::uint8_t* p, T v) {
  std::memcpy(p, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(p[i], p[sizeof(T) - 1 - i]);
}

}  // namespace detail

template <typename T>
Tensor Tensor::from(std::span<const T> values, std::vector<std::uint64_t> dims, DType dtype) {
  Tensor t;
  t.dtype = dtype;
  t.dims = std::move(dims);
  if (t.count() != values.size()) throw TensorError(TensorErrc::kShape, "value count does not match dims");
  const std::size_t es = dtype_size(dtype);
  t.payload.resize(values.size() * es);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint8_t* p = t.payload.data() + i * es;
    switch (dtype) {
      case DType::F32: detail::store_le(p, static_cast<float>(values[i])); break;
      case DType::F64: detail::store_le(p, static_cast<double>(values[i])); break;
      case DType::U8: detail::store_le(p, static_cast<std::uint8_t>(values[i])); break;
    }
  }
  return t;
}

template <typename T>
std::vector<T> Tensor::values() const {
  const std::size_t es = dtype_size(dtype);
  const std::size_t n = payload.size() / es;
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = payload.data() + i * es;
    switch (dtype) {
      case DType::F32: out[i] = static_cast<T>(detail::load_le<float>(p)); break;
      case DType::F64: out[i] = static_cast<T>(detail::load_le<double>(p)); break;
      case DType::U8: out[i] = static_cast<T>(p[0]); break;
    }
  }
  return out;
}

inline std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.dims.size() > 255) throw TensorError(TensorErrc::kShape, "too many dimensions");
  if (t.payload.size() != t.count() * dtype_size(t.dtype))
    throw TensorError(TensorErrc::kShape, "payload size does not match dims");
  std::vector<std::uint8_t> out(7 + 8 * t.dims.size() + t.payload.size());
  std::memcpy(out.data(), kTensorMagic, 4);
  out[4] = kTensorVersion;
  out[5] = static_cast<std::uint8_t>(t.dtype);
  out[6] = static_cast<std::uint8_t>(t.dims.size());
  for (std::size_t i = 0; i < t.dims.size(); ++i) detail::store_le(out.data() + 7 + 8 * i, t.dims[i]);
  std::memcpy(out.data() + 7 + 8 * t.dims.size(), t.payload.data(), t.payload.size());
  return out;
}

/// Parses one tensor from the front of `bytes`. `consumed` receives the
/// encoded length; when null, trailing bytes are an error.
inline Tensor decode_tensor(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kTensorMagic, 4) != 0)
    throw TensorError(TensorErrc::kBadMagic, "not a tensor file (bad magic)");
  if (bytes.size() < 7) throw TensorError(TensorErrc::kTruncated, "truncated tensor header");
  if (bytes[4] != kTensorVersion)
    throw TensorError(TensorErrc::kBadVersion, "unsupported tensor version " + std::to_string(bytes[4]));
  const auto dt = bytes[5];
  if (dt < 1 || dt > 3) throw TensorError(TensorErrc::kUnsupportedDtype, "unsupported dtype " + std::to_string(dt));
  Tensor t;
  t.dtype = static_cast<DType>(dt);
  const std::size_t ndim = bytes[6];
  std::size_t off = 7;
  if (bytes.size() < off + 8 * ndim) throw TensorError(TensorErrc::kTruncated, "truncated tensor dims");
  t.dims.resize(ndim);
  std::uint64_t count = 1;
  const std::size_t es = dtype_size(t.dtype);
  for (std::size_t i = 0; i < ndim; ++i) {
    t.dims[i] = detail::load_le<std::uint64_t>(bytes.data() + off + 8 * i);
    if (t.dims[i] != 0 && count > (UINT64_MAX / es) / t.dims[i])
      throw TensorError(TensorErrc::kShape, "tensor dims overflow");
    count *= t.dims[i];
  }
  off += 8 * ndim;
  const std::uint64_t need = count * es;
  if (bytes.size() - off < need) throw TensorError(TensorErrc::kTruncated, "truncated tensor payload");
  if (!consumed && bytes.size() - off > need)
    throw TensorError(TensorErrc::kTrailingBytes, "trailing bytes after tensor payload");
  t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(off),
                   bytes.begin() + static_cast<std::ptrdiff_t>(off + need));
  if (consumed) *consumed = off + need;
  return t;
}

inline void write_tensor(const fs::path& path, const Tensor& t) { atomic_write(path, encode_tensor(t)); }

inline Tensor read_tensor(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return decode_tensor(bytes);
}

/// Grid <-> tensor. 1-channel grids map to H×W, others to H×W×C.
template <typename T>
Tensor grid_tensor(const Grid<T>& g, DType dtype) {
  std::vector<std::uint64_t> dims{static_cast<std::uint64_t>(g.height), static_cast<std::uint64_t>(g.width)};
  if (g.channels != 1) dims.push_back(static_cast<std::uint64_t>(g.channels));
  return Tensor::from<T>(g.data, dims, dtype);
}

template <typename T>
Grid<T> tensor_grid(const Tensor& t) {
  if (t.dims.size() != 2 && t.dims.size() != 3)
    throw TensorError(TensorErrc::kShape, "expected an H×W or H×W×C tensor");
  Grid<T> g(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
            t.dims.size() == 3 ? static_cast<int>(t.dims[2]) : 1);
  g.data = t.values<T>();
  return g;
}

}  // namespace uad::io

#endif  // UAD_IO_TENSOR_FILE_HPP
