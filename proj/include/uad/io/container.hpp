#ifndef UAD_IO_CONTAINER_HPP
#define UAD_IO_CONTAINER_HPP

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "uad/io/tensor_file.hpp"

namespace uad::io {

// Multi-tensor bundle used for checkpoints, fused fields and embedding stores.
//   "UADC" | u8 version=1 | u64 header length | JSON header | tensor records
// The header's "arrays" lists names in record order; each record is a
// complete UADT encoding.

inline constexpr char kContainerMagic[4] = {'U', 'A', 'D', 'C'};

struct Container {
  nlohmann::json header = nlohmann::json::object();
  std::map<std::string, Tensor> arrays;
  std::vector<std::string> order;

  void put(const std::string& name, Tensor t) {
    if (!arrays.count(name)) order.push_back(name);
    arrays[name] = std::move(t);
  }
  [[nodiscard]] const Tensor& get(const std::string& name) const {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw Error("container", "missing array '" + name + "'");
    return it->second;
  }
  [[nodiscard]] bool has(const std::string& name) const { return arrays.count(name) > 0; }
};

inline std::vector<std::uint8_t> encode_container(const Container& c) {
  nlohmann::json h = c.header;
  h["arrays"] = c.order;
  const std::string text = h.dump();
  std::vector<std::uint8_t> out(13);
  std::memcpy(out.data(), kContainerMagic, 4);
  out[4] = 1;
  detail::store_le<std::uint64_t>(out.data() + 5, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& name : c.order) {
    const auto rec = encode_tensor(c.arrays.at(name));
    out.insert(out.end(), rec.begin(), rec.end());
  }
  return out;
}

inline Container decode_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0)
    throw TensorError(TensorErrc::kBadMagic, "not a container file (bad magic)");
  if (bytes.size() < 13) throw TensorError(TensorErrc::kTruncated, "truncated container header");
  if (bytes[4] != 1) throw TensorError(TensorErrc::kBadVersion, "unsupported container version");
  const auto len = detail::load_le<std::uint64_t>(bytes.data() + 5);
  if (bytes.size() - 13 < len) throw TensorError(TensorErrc::kTruncated, "truncated container header");
  Container c;
  c.header = nlohmann::json::parse(bytes.begin() + 13, bytes.begin() + 13 + static_cast<std::ptrdiff_t>(len));
  std::size_t off = 13 + len;
  for (const auto& name : c.header.at("arrays")) {
    std::size_t used = 0;
    c.put(name.get<std::string>(), decode_tensor(bytes.subspan(off), &used));
    off += used;
  }
  if (off != bytes.size()) throw TensorError(TensorErrc::kTrailingBytes, "trailing bytes after container");
  c.header.erase("arrays");
  return c;
}

inline void write_container(const fs::path& path, const Container& c) { atomic_write(path, encode_container(c)); }

inline Container read_container(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return decode_container(bytes);
}

}  // namespace uad::io

#endif  // UAD_IO_CONTAINER_HPP
