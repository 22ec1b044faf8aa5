#ifndef UAD_SYNTH_SYNTHGEN_HPP
#define UAD_SYNTH_SYNTHGEN_HPP

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uad/annotate/embeddings.hpp"
#include "uad/core/seed.hpp"
#include "uad/fusion/fusion.hpp"
#include "uad/io/manifest.hpp"

namespace uad::synth {

using nlohmann::json;

enum class Shape { kBox, kCylinder, kSphere };

/// Solid primitive in the object frame. `half` holds half-extents for boxes,
/// (radius, unused, half-height) for z-axis cylinders and (radius, -, -) for
/// spheres.
struct Primitive {
  Shape shape = Shape::kBox;
  Eigen::Vector3d half = Eigen::Vector3d::Constant(0.05);
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

/// Semantic part: one or more primitives sharing a feature signature.
struct PartSpec {
  std::string name;
  int link_id = 0;
  std::vector<Primitive> primitives;
  std::string instruction{};      // becomes a mock-VLM proposal when set
  Vec signature{};                // generated when empty
  double noise = -1.0;            // per-component σ as a fraction of ‖signature‖; <0 -> spec default
  std::array<std::uint8_t, 3> color{200, 200, 200};
};

struct CameraRig {
  int count = 14;
  double radius = 0.0;           // 0 -> fit the object's bounding sphere
  double elevation_deg = 30.0;   // ring layout only
  bool fibonacci = true;         // spherical Fibonacci layout, else a ring
};

struct SynthSpec {
  std::string object_id = "object";
  std::string category = "object";
  std::vector<PartSpec> parts;
  CameraRig cameras;
  int width = 64;
  int height = 64;
  double fov_deg = 45.0;
  int feature_dim = 16;
  int embed_dim = 32;
  double signature_scale = 4.0;
  double noise = 0.05;
  double min_angle_deg = 60.0;
  std::uint64_t seed = 0;
  Eigen::Vector3d natural_direction = Eigen::Vector3d(1.0, -0.6, 0.7);  // view-score preference
};

struct RenderedView {
  geom::CameraView view;
  LabelMap part_ids;  // 0 background, part index + 1 otherwise
  fusion::ViewFeatures features;
  double score = 0.0;
};

struct Scene {
  SynthSpec spec;  // with signatures filled in
  std::vector<RenderedView> views;
};

namespace detail {

inline constexpr double kHitEps = 1e-9;

/// Smallest t > 0 with o + t·d on the primitive surface, if any.
inline std::optional<double> intersect(const Primitive& p, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  const Eigen::Vector3d lo = p.rotation.transpose() * (o - p.center);
  const Eigen::Vector3d ld = p.rotation.transpose() * d;
  double best = std::numeric_limits<double>::infinity();
  auto take = [&](double t) {
    if (t > kHitEps && t < best) best = t;
  };
  switch (p.shape) {
    case Shape::kSphere: {
      const double r = p.half.x();
      const double a = ld.squaredNorm(), b = 2.0 * lo.dot(ld), c = lo.squaredNorm() - r * r;
      const double disc = b * b - 4 * a * c;
      if (disc < 0.0) break;
      const double s = std::sqrt(disc);
      take((-b - s) / (2 * a));
      if (!std::isfinite(best)) take((-b + s) / (2 * a));
      break;
    }
    case Shape::kBox: {
      double tmin = -std::numeric_limits<double>::infinity(), tmax = std::numeric_limits<double>::infinity();
      bool miss = false;
      for (int i = 0; i < 3; ++i) {
        if (std::abs(ld[i]) < 1e-15) {
          if (std::abs(lo[i]) > p.half[i]) miss = true;
          continue;
        }
        double t1 = (-p.half[i] - lo[i]) / ld[i], t2 = (p.half[i] - lo[i]) / ld[i];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
      }
      if (miss || tmax < tmin) break;
      take(tmin);
      if (!std::isfinite(best)) take(tmax);
      break;
    }
    case Shape::kCylinder: {
      const double r = p.half.x(), hh = p.half.z();
      const double a = ld.x() * ld.x() + ld.y() * ld.y();
      if (a > 1e-18) {
        const double b = 2.0 * (lo.x() * ld.x() + lo.y() * ld.y());
        const double c = lo.x() * lo.x() + lo.y() * lo.y() - r * r;
        const double disc = b * b - 4 * a * c;
        if (disc >= 0.0) {
          const double s = std::sqrt(disc);
          for (double t : {(-b - s) / (2 * a), (-b + s) / (2 * a)})
            if (std::abs(lo.z() + t * ld.z()) <= hh) take(t);
        }
      }
      if (std::abs(ld.z()) > 1e-15) {
        for (double zc : {-hh, hh}) {
          const double t = (zc - lo.z()) / ld.z();
          const double x = lo.x() + t * ld.x(), y = lo.y() + t * ld.y();
          if (x * x + y * y <= r * r) take(t);
        }
      }
      break;
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

inline double bounding_radius(const SynthSpec& spec) {
  double r = 0.0;
  for (const auto& part : spec.parts)
    for (const auto& p : part.primitives) {
      const double extent = p.shape == Shape::kBox ? p.half.norm()
                            : p.shape == Shape::kCylinder ? std::hypot(p.half.x(), p.half.z())
                                                          : p.half.x();
      r = std::max(r, p.center.norm() + extent);
    }
  return r;
}

inline std::vector<Eigen::Vector3d> fibonacci_sphere(std::size_t n) {
  std::vector<Eigen::Vector3d> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double rr = std::sqrt(1.0 - z * z), phi = golden * static_cast<double>(i);
    out.emplace_back(rr * std::cos(phi), rr * std::sin(phi), z);
  }
  return out;
}

/// Octahedron vertices for up to six directions, Fibonacci points beyond.
inline std::vector<Eigen::Vector3d> direction_set(std::size_t n) {
  if (n > 6) return fibonacci_sphere(n);
  const std::vector<Eigen::Vector3d> octa{Eigen::Vector3d::UnitX(), -Eigen::Vector3d::UnitX(),
                                          Eigen::Vector3d::UnitY(), -Eigen::Vector3d::UnitY(),
                                          Eigen::Vector3d::UnitZ(), -Eigen::Vector3d::UnitZ()};
  return {octa.begin(), octa.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace detail

inline void validate(const SynthSpec& spec) {
  if (spec.parts.empty()) throw Error("synth", "spec has no parts");
  if (spec.cameras.count < 1) throw Error("synth", "camera count must be >= 1");
  if (spec.width < 1 || spec.height < 1 || spec.feature_dim < 1) throw Error("synth", "bad image or feature size");
  for (const auto& part : spec.parts) {
    if (part.primitives.empty()) throw Error("synth", "part '" + part.name + "' has no primitives");
    for (const auto& p : part.primitives) {
      const bool bad = p.shape == Shape::kBox ? (p.half.array() <= 0.0).any()
                       : p.shape == Shape::kCylinder ? (p.half.x() <= 0.0 || p.half.z() <= 0.0)
                                                     : p.half.x() <= 0.0;
      if (bad) throw Error("synth", "degenerate primitive in part '" + part.name + "'");
      const Eigen::Matrix3d r = p.rotation;
      if ((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw Error("synth", "primitive rotation is not orthonormal");
    }
    if (part.signature.size() != 0 && part.signature.size() != spec.feature_dim)
      throw Error("synth", "signature length differs from feature_dim");
  }
}

/// Fills in missing part signatures. Generated signatures span a random 3D
/// subspace of feature space with well-spread directions, plus a small random
/// component, and the pairwise angle margin is enforced.
inline SynthSpec with_signatures(SynthSpec spec) {
  validate(spec);
  std::mt19937_64 rng(derive_seed(spec.seed, "synth/signatures"));
  std::normal_distribution<double> n01(0.0, 1.0);
  const int d = spec.feature_dim;
  Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(d, std::min(d, 3), [&] { return n01(rng); });
  const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
                                Eigen::MatrixXd::Identity(d, std::min(d, 3));
  const auto dirs = detail::direction_set(spec.parts.size());
  for (std::size_t i = 0; i < spec.parts.size(); ++i) {
    auto& part = spec.parts[i];
    if (part.signature.size() == spec.feature_dim) continue;
    Vec jitter = Vec::NullaryExpr(d, [&] { return n01(rng); });
    jitter /= jitter.norm();
    part.signature = spec.signature_scale * (basis * dirs[i].head(basis.cols()) + 0.15 * jitter);
  }
  const double cos_margin = std::cos(spec.min_angle_deg * std::numbers::pi / 180.0);
  for (std::size_t i = 0; i < spec.parts.size(); ++i)
    for (std::size_t j = i + 1; j < spec.parts.size(); ++j) {
      const auto& a = spec.parts[i].signature;
      const auto& b = spec.parts[j].signature;
      if (a.dot(b) / (a.norm() * b.norm()) > cos_margin)
        throw Error("synth", "part signatures '" + spec.parts[i].name + "' and '" + spec.parts[j].name +
                                 "' are closer than the angle margin");
    }
  return spec;
}

inline Eigen::Matrix3d intrinsics_for(const SynthSpec& spec) {
  const double f = 0.5 * spec.width / std::tan(0.5 * spec.fov_deg * std::numbers::pi / 180.0);
  return geom::pinhole(f, f, 0.5 * (spec.width - 1), 0.5 * (spec.height - 1));
}

inline std::vector<Eigen::Vector3d> camera_positions(const SynthSpec& spec) {
  const double r_obj = detail::bounding_radius(spec);
  const double radius = spec.cameras.radius > 0.0
                            ? spec.cameras.radius
                            : 1.15 * r_obj / std::sin(0.5 * spec.fov_deg * std::numbers::pi / 180.0);
  std::vector<Eigen::Vector3d> eyes;
  const int k = spec.cameras.count;
  if (spec.cameras.fibonacci) {
    for (const auto& dir : detail::fibonacci_sphere(static_cast<std::size_t>(k))) eyes.push_back(radius * dir);
  } else {
    const double el = spec.cameras.elevation_deg * std::numbers::pi / 180.0;
    for (int i = 0; i < k; ++i) {
      const double az = 2.0 * std::numbers::pi * i / k;
      eyes.push_back(radius * Eigen::Vector3d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)));
    }
  }
  return eyes;
}

/// Ray-casts one view of the object from `eye`, looking at the origin.
inline RenderedView render_view(const SynthSpec& spec, const Eigen::Vector3d& eye, std::uint64_t noise_seed) {
  RenderedView out;
  auto& v = out.view;
  v.intrinsics = intrinsics_for(spec);
  v.extrinsics = geom::look_at(eye, Eigen::Vector3d::Zero());
  const int h = spec.height, w = spec.width, d = spec.feature_dim;
  v.rgb = Rgb(h, w, 3, 255);
  v.depth = Map(h, w);
  v.fg_mask = Mask(h, w);
  v.link_ids = LabelMap(h, w, 1, -1);
  out.part_ids = LabelMap(h, w);
  out.features = fusion::ViewFeatures(h, w, d);

  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::mt19937_64 bg_rng(derive_seed(spec.seed, "synth/background"));
  Vec background = Vec::NullaryExpr(d, [&] { return n01(bg_rng); });
  background *= spec.signature_scale / background.norm();

  const Eigen::Matrix3d kinv = v.intrinsics.inverse();
  const Eigen::Matrix3d rot = v.rotation();
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const Eigen::Vector3d dir = rot * (kinv * Eigen::Vector3d(c, r, 1.0));
      double best = std::numeric_limits<double>::infinity();
      int owner = -1;
      for (std::size_t pi = 0; pi < spec.parts.size(); ++pi)
        for (const auto& prim : spec.parts[pi].primitives)
          if (auto t = detail::intersect(prim, eye, dir); t && *t < best) {
            best = *t;
            owner = static_cast<int>(pi);
          }
      const Vec* sig = &background;
      double sigma = spec.noise * background.norm();
      if (owner >= 0) {
        const auto& part = spec.parts[static_cast<std::size_t>(owner)];
        // z of the camera-frame ray direction is 1, so the ray parameter is the depth.
        v.depth.at(r, c) = best;
        v.fg_mask.at(r, c) = 1;
        v.link_ids.at(r, c) = part.link_id;
        out.part_ids.at(r, c) = owner + 1;
        for (int k = 0; k < 3; ++k) v.rgb.at(r, c, k) = part.color[static_cast<std::size_t>(k)];
        sig = &part.signature;
        sigma = (part.noise >= 0.0 ? part.noise : spec.noise) * part.signature.norm();
      }
      for (int k = 0; k < d; ++k) out.features.at(r, c, k) = static_cast<float>((*sig)[k] + sigma * n01(rng));
    }
  out.score = eye.normalized().dot(spec.natural_direction.normalized());
  return out;
}

inline Scene generate(const SynthSpec& input) {
  Scene scene;
  scene.spec = with_signatures(input);
  const auto eyes = camera_positions(scene.spec);
  for (std::size_t i = 0; i < eyes.size(); ++i)
    scene.views.push_back(render_view(scene.spec, eyes[i], derive_seed(scene.spec.seed, "synth/view/" + std::to_string(i))));
  return scene;
}

/// Per-point ground-truth part index (0-based, -1 if unknown) looked up at
/// each point's source pixel.
inline std::vector<int> point_part_labels(const geom::PointCloud& cloud, const std::vector<LabelMap>& part_maps) {
  std::vector<int> out(cloud.size(), -1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& m = part_maps.at(static_cast<std::size_t>(cloud.source_view[i]));
    out[i] = m[static_cast<std::size_t>(cloud.source_pixel[i])] - 1;
  }
  return out;
}

/// Writes the scene in the pipeline's on-disk layout and returns the manifest
/// path: scene.json, views/, features/, gt/, embeddings.uadc, mock_vlm.json.
inline io::fs::path write_scene(const Scene& scene, const io::fs::path& dir) {
  const auto& spec = scene.spec;
  io::SceneManifest m;
  m.base = dir;
  m.object_id = spec.object_id;
  m.category = spec.category;
  m.feature_dim = spec.feature_dim;
  std::vector<int> links;
  for (const auto& p : spec.parts) links.push_back(p.link_id);
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  m.links = links;
  const bool articulated = links.size() >= 2;

  json part_maps = json::array();
  std::vector<double> scores;
  for (std::size_t i = 0; i < scene.views.size(); ++i) {
    const auto& rv = scene.views[i];
    char tag[16];
    std::snprintf(tag, sizeof tag, "%02zu", i);
    io::ViewEntry e;
    e.rgb = std::string("views/rgb_") + tag + ".png";
    e.depth = std::string("views/depth_") + tag + ".uadt";
    e.mask = std::string("views/mask_") + tag + ".png";
    e.features = std::string("features/feat_") + tag + ".uadt";
    e.intrinsics = rv.view.intrinsics;
    e.extrinsics = rv.view.extrinsics;
    e.score = rv.score;
    io::write_png(dir / e.rgb, rv.view.rgb);
    io::write_tensor(dir / e.depth, io::grid_tensor(rv.view.depth, io::DType::F64));
    Mask mask_img = rv.view.fg_mask;
    for (auto& b : mask_img.data) b = b ? 255 : 0;
    io::write_png(dir / e.mask, mask_img);
    io::write_tensor(dir / e.features, io::grid_tensor(rv.features, io::DType::F32));
    if (articulated) {
      e.links = std::string("views/links_") + tag + ".uadt";
      LabelMap l = rv.view.link_ids;
      for (auto& id : l.data) id = std::max(id, 0);
      io::write_tensor(dir / e.links, io::grid_tensor(l, io::DType::U8));
    }
    const std::string pm = std::string("gt/parts_") + tag + ".uadt";
    io::write_tensor(dir / pm, io::grid_tensor(rv.part_ids, io::DType::U8));
    part_maps.push_back(pm);
    scores.push_back(rv.score);
    m.views.push_back(std::move(e));
  }

  json parts = json::array();
  annotate::EmbeddingStore store(spec.embed_dim);
  json proposals = json::array();
  std::size_t canonical = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[canonical]) canonical = i;
  for (std::size_t i = 0; i < spec.parts.size(); ++i) {
    const auto& p = spec.parts[i];
    parts.push_back({{"id", i + 1}, {"name", p.name}, {"link", p.link_id}, {"instruction", p.instruction}});
    if (p.instruction.empty()) continue;
    store.put(p.instruction, annotate::stub_embedding(p.instruction, spec.embed_dim));
    proposals.push_back({{"instruction", p.instruction}, {"part_map", part_maps[canonical]}, {"part_id", i + 1}});
  }
  m.ground_truth = {{"parts", parts}, {"part_maps", part_maps}};
  m.embeddings = "embeddings.uadc";
  store.save(dir / m.embeddings);
  m.mock_fixture = "mock_vlm.json";
  io::atomic_write(dir / m.mock_fixture, json{{"objects", {{spec.category, {{"proposals", proposals}}}}}}.dump(2));
  const auto path = dir / "scene.json";
  m.save(path);
  return path;
}

// ---------------------------------------------------------------------------
// Fixture presets

inline Primitive box(Eigen::Vector3d center, Eigen::Vector3d half) {
  return {Shape::kBox, half, center, Eigen::Matrix3d::Identity()};
}
inline Primitive cylinder(Eigen::Vector3d center, double radius, double half_height,
                          const Eigen::Matrix3d& rot = Eigen::Matrix3d::Identity()) {
  return {Shape::kCylinder, {radius, radius, half_height}, center, rot};
}
inline Primitive sphere(Eigen::Vector3d center, double radius) {
  return {Shape::kSphere, Eigen::Vector3d::Constant(radius), center, Eigen::Matrix3d::Identity()};
}

/// Five-part single-link mug: body, rim band, base, handle grip, handle arms.
inline SynthSpec mug_spec(std::uint64_t seed = 0) {
  SynthSpec s;
  s.object_id = "mug";
  s.category = "mug";
  s.seed = seed;
  s.parts = {
      {"body", 0, {cylinder({0, 0, 0}, 0.040, 0.050)}, "wrap your hand around the body of the mug", {}, -1, {230, 230, 230}},
      {"rim", 0, {cylinder({0, 0, 0.050}, 0.043, 0.008)}, "drink from the rim of the mug", {}, -1, {200, 60, 60}},
      {"base", 0, {cylinder({0, 0, -0.050}, 0.043, 0.008)}, "", {}, -1, {90, 90, 90}},
      {"handle_grip", 0, {box({0.072, 0, 0}, {0.008, 0.010, 0.032})}, "grasp the handle of the mug", {}, -1, {60, 60, 200}},
      {"handle_arms", 0,
       {box({0.054, 0, 0.026}, {0.016, 0.010, 0.007}), box({0.054, 0, -0.026}, {0.016, 0.010, 0.007})},
       "hook a finger through the mug handle", {}, -1, {60, 160, 60}},
  };
  return s;
}

/// Three-link cabinet: carcass, door with knob, drawer with knob.
inline SynthSpec cabinet_spec(std::uint64_t seed = 0) {
  SynthSpec s;
  s.object_id = "cabinet";
  s.category = "cabinet";
  s.seed = seed;
  s.parts = {
      {"carcass", 0, {box({0, 0, 0}, {0.20, 0.22, 0.25})}, "", {}, -1, {180, 150, 110}},
      {"door", 1, {box({0.21, 0, 0.10}, {0.01, 0.20, 0.13})}, "push the cabinet door closed", {}, -1, {150, 110, 70}},
      {"door_knob", 1, {box({0.245, 0.12, 0.10}, {0.025, 0.035, 0.035})}, "pull the knob to open the cabinet door", {}, -1, {40, 40, 40}},
      {"drawer", 2, {box({0.21, 0, -0.14}, {0.01, 0.20, 0.09})}, "", {}, -1, {160, 120, 80}},
      {"drawer_knob", 2, {box({0.245, 0, -0.14}, {0.025, 0.035, 0.035})}, "pull the drawer handle to open the drawer", {}, -1, {30, 30, 30}},
  };
  return s;
}

/// Three-part bottle; mean shift alone finds fewer than five regions.
inline SynthSpec bottle_spec(std::uint64_t seed = 0) {
  SynthSpec s;
  s.object_id = "bottle";
  s.category = "bottle";
  s.seed = seed;
  s.parts = {
      {"body", 0, {cylinder({0, 0, -0.03}, 0.035, 0.06)}, "hold the bottle by its body", {}, -1, {60, 140, 60}},
      {"neck", 0, {cylinder({0, 0, 0.05}, 0.016, 0.025)}, "grip the neck of the bottle to pour", {}, -1, {80, 170, 80}},
      {"cap", 0, {cylinder({0, 0, 0.082}, 0.020, 0.010)}, "twist the bottle cap to open it", {}, -1, {200, 40, 40}},
  };
  return s;
}

inline SynthSpec hammer_spec(std::uint64_t seed = 0) {
  SynthSpec s;
  s.object_id = "hammer";
  s.category = "hammer";
  s.seed = seed;
  s.parts = {
      {"handle", 0, {box({-0.03, 0, 0}, {0.09, 0.014, 0.012})}, "grasp the hammer by its handle", {}, -1, {150, 100, 50}},
      {"head", 0, {box({0.075, 0, 0}, {0.018, 0.020, 0.050})}, "strike the nail with the hammer head", {}, -1, {120, 120, 130}},
      {"grip_end", 0, {sphere({-0.125, 0, 0}, 0.02)}, "", {}, -1, {30, 30, 30}},
  };
  return s;
}

inline SynthSpec pan_spec(std::uint64_t seed = 0) {
  SynthSpec s;
  s.object_id = "pan";
  s.category = "pan";
  s.seed = seed;
  s.parts = {
      {"pan_body", 0, {cylinder({-0.04, 0, 0}, 0.080, 0.018)}, "cook food in the pan", {}, -1, {70, 70, 70}},
      {"handle", 0, {box({0.10, 0, 0.008}, {0.060, 0.012, 0.008})}, "hold the pan by the handle", {}, -1, {30, 30, 30}},
      {"handle_tip", 0, {sphere({0.165, 0, 0.008}, 0.016)}, "", {}, -1, {160, 40, 40}},
  };
  return s;
}

inline std::optional<SynthSpec> preset(const std::string& name, std::uint64_t seed) {
  if (name == "mug") return mug_spec(seed);
  if (name == "cabinet") return cabinet_spec(seed);
  if (name == "bottle") return bottle_spec(seed);
  if (name == "hammer") return hammer_spec(seed);
  if (name == "pan") return pan_spec(seed);
  return std::nullopt;
}

}  // namespace uad::synth

#endif  // UAD_SYNTH_SYNTHGEN_HPP
