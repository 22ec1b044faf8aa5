#ifndef UAD_DECODER_CHECKPOINT_HPP
#define UAD_DECODER_CHECKPOINT_HPP

#include "uad/decoder/film.hpp"
#include "uad/io/container.hpp"

namespace uad::decoder {

/// Decoder parameters plus a JSON header (dims, layer plan, and whatever the
/// caller adds, e.g. seed and epoch).
inline void save_checkpoint(const io::fs::path& path, const FilmDecoder& d, nlohmann::json extra = {}) {
  io::Container c;
  c.header = extra.is_object() ? extra : nlohmann::json::object();
  c.header["kind"] = "film_decoder";
  c.header["input_dim"] = d.input_dim;
  c.header["embed_dim"] = d.embed_dim;
  c.header["layer_plan"] = d.plan();
  FilmDecoder copy = d;
  for (auto& [name, s] : parameters(copy))
    c.put(name, io::Tensor::from<double>(s, {s.size()}, io::DType::F64));
  io::write_container(path, c);
}

struct Checkpoint {
  FilmDecoder decoder;
  nlohmann::json header;
};

inline Checkpoint load_checkpoint(const io::fs::path& path) {
  const io::Container c = io::read_container(path);
  if (c.header.value("kind", "") != "film_decoder") throw Error("checkpoint", "not a decoder checkpoint");
  const auto plan = c.header.at("layer_plan").get<std::vector<int>>();
  Checkpoint out{make_decoder(c.header.at("input_dim").get<int>(), c.header.at("embed_dim").get<int>(), 0,
                              FilmInit::kIdentity, plan),
                 c.header};
  for (auto& [name, s] : parameters(out.decoder)) {
    const auto v = c.get(name).values<double>();
    if (v.size() != s.size()) throw Error("checkpoint", "array '" + name + "' has the wrong size");
    std::copy(v.begin(), v.end(), s.begin());
  }
  return out;
}

}  // namespace uad::decoder

#endif  // UAD_DECODER_CHECKPOINT_HPP
