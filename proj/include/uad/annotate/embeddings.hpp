#ifndef UAD_ANNOTATE_EMBEDDINGS_HPP
#define UAD_ANNOTATE_EMBEDDINGS_HPP

#include <map>
#include <optional>
#include <random>
#include <string>

#include "uad/core/linalg.hpp"
#include "uad/core/seed.hpp"
#include "uad/io/container.hpp"

namespace uad::annotate {

/// Instruction text -> embedding vector, persisted as a container with the
/// keys in the header and one K×e float64 array.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(int dim) : dim_(dim) {}

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return vectors_.size(); }
  [[nodiscard]] const std::map<std::string, Vec>& entries() const { return vectors_; }

  void put(const std::string& key, const Vec& v) {
    if (dim_ == 0) dim_ = static_cast<int>(v.size());
    if (v.size() != dim_) throw Error("embeddings", "embedding dimension mismatch for '" + key + "'");
    vectors_[key] = v;
  }

  [[nodiscard]] std::optional<Vec> find(const std::string& key) const {
    auto it = vectors_.find(key);
    if (it == vectors_.end()) return std::nullopt;
    return it->second;
  }

  void merge(const EmbeddingStore& other) {
    for (const auto& [k, v] : other.vectors_) put(k, v);
  }

  [[nodiscard]] io::Container to_container() const {
    io::Container c;
    std::vector<std::string> keys;
    std::vector<double> flat;
    for (const auto& [k, v] : vectors_) {
      keys.push_back(k);
      flat.insert(flat.end(), v.data(), v.data() + v.size());
    }
    bool unit = true;
    for (const auto& [k, v] : vectors_) unit = unit && std::abs(v.norm() - 1.0) < 1e-6;
    c.header = {{"kind", "embedding_store"}, {"dim", dim_}, {"keys", keys}, {"unit_norm", unit}};
    c.put("embeddings", io::Tensor::from<double>(flat, {keys.size(), static_cast<std::uint64_t>(dim_)}, io::DType::F64));
    return c;
  }

  static EmbeddingStore from_container(const io::Container& c) {
    EmbeddingStore s(c.header.at("dim").get<int>());
    const auto keys = c.header.at("keys").get<std::vector<std::string>>();
    const io::Tensor& t = c.get("embeddings");
    if (t.dims.size() != 2 || t.dims[0] != keys.size() || static_cast<int>(t.dims[1]) != s.dim_)
      throw Error("embeddings", "embedding array shape does not match header");
    const auto flat = t.values<double>();
    for (std::size_t i = 0; i < keys.size(); ++i)
      s.put(keys[i], Eigen::Map<const Vec>(flat.data() + i * static_cast<std::size_t>(s.dim_), s.dim_));
    return s;
  }

  void save(const io::fs::path& path) const { io::write_container(path, to_container()); }
  static EmbeddingStore load(const io::fs::path& path) { return from_container(io::read_container(path)); }

 private:
  int dim_ = 0;
  std::map<std::string, Vec> vectors_;
};

/// Test-stub embedding: a unit Gaussian vector seeded by the instruction text.
inline Vec stub_embedding(const std::string& text, int dim) {
  std::mt19937_64 rng(splitmix64(fnv1a(text)));
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n(rng);
  return v / v.norm();
}

}  // namespace uad::annotate

#endif  // UAD_ANNOTATE_EMBEDDINGS_HPP
