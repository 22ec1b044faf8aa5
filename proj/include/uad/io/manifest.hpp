#ifndef UAD_IO_MANIFEST_HPP
#define UAD_IO_MANIFEST_HPP

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uad/fusion/fusion.hpp"
#include "uad/geom/camera.hpp"
#include "uad/io/png.hpp"
#include "uad/io/tensor_file.hpp"

namespace uad::io {

using nlohmann::json;

struct ViewEntry {
  std::string rgb;       // PNG
  std::string depth;     // H×W tensor, meters
  std::string mask;      // PNG (nonzero = foreground) or H×W uint8 tensor
  std::string links;     // optional H×W tensor of link ids
  std::string features;  // optional H×W×d tensor
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix4d extrinsics = Eigen::Matrix4d::Identity();
  std::optional<double> score;
};

/// Scene description: one object, its rendered views and side files.
/// Relative paths resolve against the manifest's directory.
struct SceneManifest {
  std::string object_id;
  std::string category;
  int feature_dim = 0;
  std::vector<ViewEntry> views;
  std::vector<int> links;
  std::string embeddings;    // embedding store container
  std::string mock_fixture;  // optional mock-VLM fixture
  json ground_truth = json::object();
  fs::path base;

  [[nodiscard]] fs::path path_of(const std::string& rel) const { return resolve(base, rel); }

  [[nodiscard]] json to_json() const {
    json vs = json::array();
    for (const auto& v : views) {
      // Matrices are stored row-major; transposing the column-major Eigen data gives that order.
      const Eigen::Matrix4d tr = v.extrinsics.transpose();
      const Eigen::Matrix3d kr = v.intrinsics.transpose();
      json j{{"rgb", v.rgb}, {"depth", v.depth}, {"mask", v.mask},
             {"intrinsics", std::vector<double>(kr.data(), kr.data() + 9)},
             {"extrinsics", std::vector<double>(tr.data(), tr.data() + 16)}};
      if (!v.links.empty()) j["links"] = v.links;
      if (!v.features.empty()) j["features"] = v.features;
      if (v.score) j["score"] = *v.score;
      vs.push_back(j);
    }
    json j{{"object_id", object_id}, {"category", category}, {"feature_dim", feature_dim},
           {"views", vs}, {"links", links}};
    if (!embeddings.empty()) j["embeddings"] = embeddings;
    if (!mock_fixture.empty()) j["mock_fixture"] = mock_fixture;
    if (!ground_truth.empty()) j["ground_truth"] = ground_truth;
    return j;
  }

  static SceneManifest from_json(const json& j, const fs::path& base) {
    SceneManifest m;
    m.base = base;
    m.object_id = j.at("object_id").get<std::string>();
    m.category = j.value("category", m.object_id);
    m.feature_dim = j.value("feature_dim", 0);
    m.links = j.value("links", std::vector<int>{});
    m.embeddings = j.value("embeddings", "");
    m.mock_fixture = j.value("mock_fixture", "");
    m.ground_truth = j.value("ground_truth", json::object());
    for (const auto& v : j.at("views")) {
      ViewEntry e;
      e.rgb = v.value("rgb", "");
      e.depth = v.at("depth").get<std::string>();
      e.mask = v.at("mask").get<std::string>();
      e.links = v.value("links", "");
      e.features = v.value("features", "");
      const auto k = v.at("intrinsics").get<std::vector<double>>();
      const auto t = v.at("extrinsics").get<std::vector<double>>();
      if (k.size() != 9 || t.size() != 16) throw Error("manifest", "intrinsics/extrinsics have the wrong size");
      e.intrinsics = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(k.data());
      e.extrinsics = Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>>(t.data());
      if (v.contains("score")) e.score = v.at("score").get<double>();
      m.views.push_back(std::move(e));
    }
    if (m.views.empty()) throw Error("manifest", "scene has no views");
    return m;
  }

  /// Loads and checks that every referenced file exists.
  static SceneManifest load(const fs::path& path) {
    SceneManifest m = from_json(json::parse(read_text(path)), path.parent_path());
    auto need = [&](const std::string& rel) {
      if (!rel.empty() && !fs::exists(m.path_of(rel)))
        throw Error("manifest", "referenced file missing: " + m.path_of(rel).string());
    };
    for (const auto& v : m.views) {
      need(v.rgb);
      need(v.depth);
      need(v.mask);
      need(v.links);
      need(v.features);
    }
    need(m.embeddings);
    need(m.mock_fixture);
    return m;
  }

  void save(const fs::path& path) const { atomic_write(path, to_json().dump(2)); }

  [[nodiscard]] std::vector<geom::CameraView> load_views() const {
    std::vector<geom::CameraView> out;
    for (const auto& v : views) {
      geom::CameraView cv;
      cv.intrinsics = v.intrinsics;
      cv.extrinsics = v.extrinsics;
      cv.depth = tensor_grid<double>(read_tensor(path_of(v.depth)));
      if (v.mask.ends_with(".png")) {
        cv.fg_mask = read_png(path_of(v.mask), 1);
        for (auto& b : cv.fg_mask.data) b = b ? 1 : 0;
      } else {
        cv.fg_mask = tensor_grid<std::uint8_t>(read_tensor(path_of(v.mask)));
      }
      if (!v.rgb.empty()) cv.rgb = read_png(path_of(v.rgb), 3);
      if (!v.links.empty()) cv.link_ids = tensor_grid<int>(read_tensor(path_of(v.links)));
      geom::validate(cv);
      out.push_back(std::move(cv));
    }
    return out;
  }

  [[nodiscard]] std::vector<fusion::ViewFeatures> load_features() const {
    std::vector<fusion::ViewFeatures> out;
    for (const auto& v : views) {
      if (v.features.empty()) throw Error("manifest", "view has no feature file");
      auto g = tensor_grid<float>(read_tensor(path_of(v.features)));
      if (feature_dim && g.channels != feature_dim)
        throw Error("manifest", "feature file dim does not match manifest feature_dim");
      out.push_back(std::move(g));
    }
    return out;
  }

  [[nodiscard]] std::vector<double> scores() const {
    std::vector<double> s;
    for (const auto& v : views) {
      if (!v.score) return {};
      s.push_back(*v.score);
    }
    return s;
  }
};

}  // namespace uad::io

#endif  // UAD_IO_MANIFEST_HPP
