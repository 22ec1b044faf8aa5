#ifndef UAD_CLI_ARTIFACTS_HPP
#define UAD_CLI_ARTIFACTS_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uad/annotate/dataset.hpp"
#include "uad/io/container.hpp"
#include "uad/io/manifest.hpp"

// Files passed between CLI subcommands:
//   fused.uadc    point cloud + fused feature field (fuse -> cluster)
//   regions.uadc  fused.uadc plus region labels     (cluster -> annotate)
//   dataset.json  triplet index with maps/*.uadt    (annotate -> distill, predict)
//   records.json  prediction/ground-truth pairs     (predict -> eval)

namespace uad::cli {

using nlohmann::json;

struct FusedScene {
  json header = json::object();  // object_id, category, scene, ...
  geom::PointCloud cloud;
  fusion::FeatureField field;
  regions::RegionLabeling labeling;  // num_regions == 0 when not clustered
};

namespace detail {

inline io::Tensor int_column(const std::vector<int>& v) {
  std::vector<double> d(v.begin(), v.end());
  return io::Tensor::from<double>(d, {v.size()}, io::DType::F64);
}

inline std::vector<int> int_values(const io::Tensor& t, std::size_t n, const std::string& name) {
  if (t.count() != n) throw Error("artifacts", "array '" + name + "' has the wrong length");
  const auto d = t.values<double>();
  return {d.begin(), d.end()};
}

}  // namespace detail

inline io::Container to_container(const FusedScene& s) {
  io::Container c;
  c.header = s.header;
  c.header["kind"] = s.labeling.num_regions > 0 ? "regions" : "fused_field";
  const std::size_t n = s.cloud.size();
  std::vector<double> pts;
  pts.reserve(3 * n);
  for (const auto& p : s.cloud.points) pts.insert(pts.end(), {p.x(), p.y(), p.z()});
  c.put("points", io::Tensor::from<double>(pts, {n, 3}, io::DType::F64));
  c.put("source_view", detail::int_column(s.cloud.source_view));
  c.put("source_pixel", detail::int_column(s.cloud.source_pixel));
  c.put("link_id", detail::int_column(s.cloud.link_id));
  c.put("features", io::Tensor::from<double>({s.field.features.data(), static_cast<std::size_t>(s.field.features.size())},
                                             {n, static_cast<std::uint64_t>(s.field.dim())}, io::DType::F64));
  c.put("visible_count", detail::int_column(s.field.visible_count));
  if (s.labeling.num_regions > 0) {
    const auto& l = s.labeling;
    c.header["num_regions"] = l.num_regions;
    c.header["per_link_path"] = l.per_link_path;
    c.header["used_fallback"] = l.used_fallback;
    c.header["mean_shift_clusters"] = l.mean_shift_clusters;
    json pl = json::array();
    for (const auto& [link, range] : l.per_link) pl.push_back({link, range.first, range.second});
    c.header["per_link"] = pl;
    c.put("labels", detail::int_column(l.labels));
  }
  return c;
}

inline FusedScene from_container(const io::Container& c) {
  const std::string kind = c.header.value("kind", "");
  if (kind != "fused_field" && kind != "regions") throw Error("artifacts", "not a fused field or region file");
  FusedScene s;
  s.header = c.header;
  const io::Tensor& pts = c.get("points");
  if (pts.dims.size() != 2 || pts.dims[1] != 3) throw Error("artifacts", "points must be N×3");
  const std::size_t n = pts.dims[0];
  const auto p = pts.values<double>();
  for (std::size_t i = 0; i < n; ++i) s.cloud.points.emplace_back(p[3 * i], p[3 * i + 1], p[3 * i + 2]);
  s.cloud.source_view = detail::int_values(c.get("source_view"), n, "source_view");
  s.cloud.source_pixel = detail::int_values(c.get("source_pixel"), n, "source_pixel");
  s.cloud.link_id = detail::int_values(c.get("link_id"), n, "link_id");
  const io::Tensor& f = c.get("features");
  if (f.dims.size() != 2 || f.dims[0] != n) throw Error("artifacts", "features must be N×d");
  const auto fv = f.values<double>();
  s.field.features = Eigen::Map<const RowMatrix>(fv.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f.dims[1]));
  s.field.visible_count = detail::int_values(c.get("visible_count"), n, "visible_count");
  if (kind == "regions") {
    auto& l = s.labeling;
    l.labels = detail::int_values(c.get("labels"), n, "labels");
    l.num_regions = c.header.at("num_regions").get<int>();
    l.per_link_path = c.header.value("per_link_path", false);
    l.used_fallback = c.header.value("used_fallback", false);
    l.mean_shift_clusters = c.header.value("mean_shift_clusters", 0);
    for (const auto& e : c.header.value("per_link", json::array())) l.per_link[e[0].get<int>()] = {e[1].get<int>(), e[2].get<int>()};
    for (int v : l.labels)
      if (v < 0 || v > l.num_regions) throw Error("artifacts", "region label out of range");
  }
  return s;
}

inline void save_fused(const io::fs::path& path, const FusedScene& s) { io::write_container(path, to_container(s)); }
inline FusedScene load_fused(const io::fs::path& path) { return from_container(io::read_container(path)); }

/// One dataset.json entry. Paths are relative to the dataset directory
/// (maps) or absolute (scene, features).
struct TripletRecord {
  std::string object_id;
  std::string scene;     // scene manifest
  int view = 0;
  std::string image;     // rgb PNG of the view
  std::string features;  // feature tensor of the view
  std::string instruction;
  int region = 0;
  std::string map;       // postprocessed affordance map tensor
  bool occluded = false;

  [[nodiscard]] json to_json() const {
    return {{"object_id", object_id}, {"scene", scene},       {"view", view},     {"image", image},
            {"features", features},   {"instruction", instruction}, {"region", region}, {"map", map},
            {"occluded", occluded}};
  }
  static TripletRecord from_json(const json& j) {
    TripletRecord r;
    r.object_id = j.at("object_id").get<std::string>();
    r.scene = j.value("scene", "");
    r.view = j.at("view").get<int>();
    r.image = j.value("image", "");
    r.features = j.at("features").get<std::string>();
    r.instruction = j.at("instruction").get<std::string>();
    r.region = j.value("region", 0);
    r.map = j.at("map").get<std::string>();
    r.occluded = j.value("occluded", false);
    return r;
  }
};

struct Dataset {
  std::vector<TripletRecord> triplets;
  std::string embeddings = "embeddings.uadc";
  io::fs::path base;

  [[nodiscard]] json to_json() const {
    json t = json::array();
    for (const auto& r : triplets) t.push_back(r.to_json());
    return {{"kind", "affordance_dataset"}, {"embeddings", embeddings}, {"triplets", t}};
  }
  static Dataset load(const io::fs::path& path) {
    const json j = json::parse(io::read_text(path));
    if (j.value("kind", "") != "affordance_dataset") throw Error("artifacts", "not a dataset file: " + path.string());
    Dataset d;
    d.base = path.parent_path();
    d.embeddings = j.value("embeddings", d.embeddings);
    for (const auto& t : j.at("triplets")) d.triplets.push_back(TripletRecord::from_json(t));
    return d;
  }
  void save(const io::fs::path& path) const { io::atomic_write(path, to_json().dump(2)); }
  [[nodiscard]] io::fs::path path_of(const std::string& rel) const { return io::resolve(base, rel); }
};

/// Analytic ground-truth mask for an instruction in one view of a synthetic
/// scene, or nullopt when the manifest carries no matching part.
inline std::optional<Map> ground_truth_mask(const io::SceneManifest& m, const std::string& instruction, int view) {
  const json& gt = m.ground_truth;
  if (!gt.contains("parts") || !gt.contains("part_maps")) return std::nullopt;
  int part = 0;
  for (const auto& p : gt.at("parts"))
    if (p.value("instruction", "") == instruction) part = p.at("id").get<int>();
  if (part == 0 || view < 0 || static_cast<std::size_t>(view) >= gt.at("part_maps").size()) return std::nullopt;
  const auto ids = io::tensor_grid<int>(io::read_tensor(m.path_of(gt.at("part_maps")[static_cast<std::size_t>(view)])));
  Map mask(ids.height, ids.width);
  for (std::size_t i = 0; i < ids.pixels(); ++i) mask[i] = ids[i] == part ? 1.0 : 0.0;
  return mask;
}

}  // namespace uad::cli

#endif  // UAD_CLI_ARTIFACTS_HPP
