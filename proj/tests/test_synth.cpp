#include <gtest/gtest.h>

#include "support.hpp"

using namespace uad;
using namespace uad::synth;

namespace {

// Signed distance to a primitive's surface.
double sdf(const Primitive& p, const Eigen::Vector3d& world) {
  const Eigen::Vector3d q = p.rotation.transpose() * (world - p.center);
  switch (p.shape) {
    case Shape::kSphere:
      return q.norm() - p.half.x();
    case Shape::kBox: {
      const Eigen::Vector3d d = q.cwiseAbs() - p.half;
      return d.cwiseMax(0.0).norm() + std::min(d.maxCoeff(), 0.0);
    }
    case Shape::kCylinder: {
      const Eigen::Vector2d d(q.head<2>().norm() - p.half.x(), std::abs(q.z()) - p.half.z());
      return d.cwiseMax(0.0).norm() + std::min(d.maxCoeff(), 0.0);
    }
  }
  return 0.0;
}

SynthSpec unit_box_spec() {
  SynthSpec s;
  s.parts = {{"cube", 0, {box({0, 0, 0}, {0.5, 0.5, 0.5})}, "", {}, -1, {1, 2, 3}}};
  s.cameras.count = 1;
  s.cameras.radius = 3.0;
  s.width = 32;
  s.height = 24;
  return s;
}

std::map<std::string, std::string> dir_bytes(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& f : std::filesystem::recursive_directory_iterator(dir))
    if (f.is_regular_file()) out[std::filesystem::relative(f.path(), dir).string()] = io::read_text(f.path());
  return out;
}

}  // namespace

TEST(Synth, UnitBoxFrontalSilhouetteAndPlane) {
  const Scene s = generate(unit_box_spec());
  ASSERT_EQ(s.views.size(), 1u);
  const auto& v = s.views[0].view;
  const Eigen::Vector3d eye = v.translation();
  ASSERT_NEAR(eye.x(), 3.0, 1e-12);  // the single camera sits on +x
  int fg = 0;
  for (int r = 0; r < v.height(); ++r)
    for (int c = 0; c < v.width(); ++c) {
      // where this pixel's ray meets the plane x = 0.5
      const Eigen::Vector3d p = geom::unproject_pixel(v, r, c, 2.5);
      const double margin = 0.5 - std::max(std::abs(p.y()), std::abs(p.z()));
      if (std::abs(margin) < 1e-9) continue;
      EXPECT_EQ(v.fg_mask.at(r, c), margin > 0 ? 1 : 0) << r << "," << c;
      if (margin > 0) {
        EXPECT_NEAR(v.depth.at(r, c), 2.5, 1e-12);
        EXPECT_EQ(s.views[0].part_ids.at(r, c), 1);
        ++fg;
      } else {
        EXPECT_EQ(v.depth.at(r, c), 0.0);
      }
    }
  EXPECT_GT(fg, 50);
}

TEST(Synth, ZeroNoisePixelsCarryExactSignatures) {
  SynthSpec spec = bottle_spec(1);
  spec.noise = 0.0;
  spec.parts.pop_back();
  spec.cameras.count = 6;
  spec.width = spec.height = 32;
  const Scene s = generate(spec);
  for (const auto& rv : s.views)
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c) {
        const int part = rv.part_ids.at(r, c);
        if (part == 0) continue;
        const Vec& sig = s.spec.parts[static_cast<std::size_t>(part - 1)].signature;
        for (int k = 0; k < spec.feature_dim; ++k)
          ASSERT_EQ(rv.features.at(r, c, k), static_cast<float>(sig[k]));
      }
}

TEST(Synth, ZeroNoiseFusedRowsLieBetweenTwoSignatures) {
  SynthSpec spec = bottle_spec(1);
  spec.noise = 0.0;
  spec.parts.pop_back();
  spec.cameras.count = 8;
  spec.width = spec.height = 40;
  const Scene s = generate(spec);
  const auto data = test::scene_data(s);
  const auto cloud = geom::downsample(geom::aggregate_scene(data.views), 800);
  const auto field = fusion::fuse_features(cloud, data.views, data.features);
  Eigen::MatrixXd basis(spec.feature_dim, 2);
  for (int j = 0; j < 2; ++j) basis.col(j) = s.spec.parts[static_cast<std::size_t>(j)].signature.cast<float>().cast<double>();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  std::size_t pure = 0, valid = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!field.valid(i)) continue;
    ++valid;
    const Eigen::VectorXd f = field.features.row(static_cast<Eigen::Index>(i)).transpose();
    const Eigen::Vector2d w = qr.solve(f);
    EXPECT_LT((basis * w - f).norm(), 1e-5);
    EXPECT_NEAR(w.sum(), 1.0, 1e-5);
    EXPECT_GT(w.minCoeff(), -1e-6);
    if (w.minCoeff() < 1e-9) ++pure;
  }
  EXPECT_GT(valid, 700u);
  EXPECT_GT(static_cast<double>(pure) / static_cast<double>(valid), 0.8);
}

TEST(Synth, BackprojectionLiesOnPrimitiveSurfaces) {
  for (const auto& spec : {mug_spec(2), cabinet_spec(2), hammer_spec(2), pan_spec(2)}) {
    SynthSpec small = spec;
    small.cameras.count = 5;
    small.width = small.height = 40;
    const Scene s = generate(small);
    std::size_t checked = 0;
    for (std::size_t v = 0; v < s.views.size(); ++v) {
      const auto cloud = geom::backproject_view(s.views[v].view, static_cast<int>(v));
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& part : s.spec.parts)
          for (const auto& prim : part.primitives) best = std::min(best, std::abs(sdf(prim, cloud.points[i])));
        ASSERT_LT(best, 1e-6) << spec.object_id << " view " << v;
        ++checked;
      }
    }
    EXPECT_GT(checked, 300u);
  }
}

TEST(Synth, SameSeedSameFiles) {
  SynthSpec spec = cabinet_spec(5);
  spec.cameras.count = 3;
  spec.width = spec.height = 24;
  const auto a = test::scratch("synth_same_a"), b = test::scratch("synth_same_b");
  write_scene(generate(spec), a);
  write_scene(generate(spec), b);
  const auto fa = dir_bytes(a), fb = dir_bytes(b);
  EXPECT_EQ(fa.size(), fb.size());
  EXPECT_TRUE(fa == fb);

  spec.seed = 6;
  const auto c = test::scratch("synth_same_c");
  write_scene(generate(spec), c);
  EXPECT_NE(dir_bytes(c).at("features/feat_00.uadt"), fa.at("features/feat_00.uadt"));
}

TEST(Synth, WrittenSceneLoadsBack) {
  SynthSpec spec = cabinet_spec(1);
  spec.cameras.count = 4;
  spec.width = spec.height = 24;
  const Scene s = generate(spec);
  const auto dir = test::scratch("synth_load");
  const auto manifest = io::SceneManifest::load(write_scene(s, dir));
  EXPECT_EQ(manifest.views.size(), 4u);
  EXPECT_EQ(manifest.links, (std::vector<int>{0, 1, 2}));
  const auto views = manifest.load_views();
  const auto feats = manifest.load_features();
  for (std::size_t v = 0; v < 4; ++v) {
    EXPECT_EQ(views[v].depth.data, s.views[v].view.depth.data);
    EXPECT_EQ(views[v].fg_mask.data, s.views[v].view.fg_mask.data);
    EXPECT_EQ(views[v].link_ids.data.size(), s.views[v].view.link_ids.data.size());
    EXPECT_EQ(feats[v].data, s.views[v].features.data);
  }
  EXPECT_EQ(manifest.ground_truth.at("parts").size(), 5u);
  const auto fixture = nlohmann::json::parse(io::read_text(manifest.path_of(manifest.mock_fixture)));
  EXPECT_EQ(fixture["objects"]["cabinet"]["proposals"].size(), 3u);
}

TEST(Synth, DegenerateSpecsThrow) {
  SynthSpec s = unit_box_spec();
  s.parts[0].primitives[0].half.y() = 0.0;
  EXPECT_THROW(generate(s), Error);
  s = unit_box_spec();
  s.parts[0].primitives = {cylinder({0, 0, 0}, 0.0, 1.0)};
  EXPECT_THROW(generate(s), Error);
  s = unit_box_spec();
  s.parts[0].primitives = {sphere({0, 0, 0}, -1.0)};
  EXPECT_THROW(generate(s), Error);
  s = unit_box_spec();
  s.parts[0].primitives.clear();
  EXPECT_THROW(generate(s), Error);
  s = unit_box_spec();
  s.cameras.count = 0;
  EXPECT_THROW(generate(s), Error);
  s = unit_box_spec();
  s.parts[0].primitives[0].rotation(0, 1) = 0.5;
  EXPECT_THROW(generate(s), Error);
  EXPECT_THROW(generate(SynthSpec{}), Error);
}

TEST(Synth, SignatureAngleMargin) {
  for (auto spec : {mug_spec(0), mug_spec(9), cabinet_spec(3), bottle_spec(4), hammer_spec(5), pan_spec(6)}) {
    const SynthSpec full = with_signatures(spec);
    const double margin = std::cos(full.min_angle_deg * std::numbers::pi / 180.0);
    for (std::size_t i = 0; i < full.parts.size(); ++i)
      for (std::size_t j = i + 1; j < full.parts.size(); ++j) {
        const Vec& a = full.parts[i].signature;
        const Vec& b = full.parts[j].signature;
        EXPECT_LE(a.dot(b) / (a.norm() * b.norm()), margin);
      }
  }
  SynthSpec close = bottle_spec();
  close.parts.resize(2);
  close.parts[0].signature = Vec::Ones(close.feature_dim);
  close.parts[1].signature = Vec::Ones(close.feature_dim);
  close.parts[1].signature[0] = 1.2;
  EXPECT_THROW(with_signatures(close), Error);
  close.parts[1].signature = Vec::Ones(3);
  EXPECT_THROW(with_signatures(close), Error);
}

TEST(Synth, NoiseLevelScalesWithSignature) {
  SynthSpec spec = unit_box_spec();
  spec.width = spec.height = 48;
  spec.cameras.radius = 1.2;
  const Scene s = generate(spec);
  const Vec& sig = s.spec.parts[0].signature;
  double ss = 0.0;
  std::size_t n = 0;
  const auto& rv = s.views[0];
  for (int r = 0; r < 48; ++r)
    for (int c = 0; c < 48; ++c)
      if (rv.part_ids.at(r, c) == 1)
        for (int k = 0; k < spec.feature_dim; ++k, ++n) ss += std::pow(rv.features.at(r, c, k) - sig[k], 2);
  ASSERT_GT(n, 10000u);
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>(n)), 0.05 * sig.norm(), 0.05 * 0.05 * sig.norm());
}

TEST(Synth, ViewScoresFollowNaturalDirection) {
  SynthSpec spec = unit_box_spec();
  spec.cameras.count = 10;
  spec.width = spec.height = 8;
  const Scene s = generate(spec);
  for (const auto& rv : s.views)
    EXPECT_NEAR(rv.score, rv.view.translation().normalized().dot(spec.natural_direction.normalized()), 1e-12);
}

TEST(Synth, PresetsRecoverParts) {
  for (std::uint64_t seed : {0, 1}) {
    const auto mug = test::region_recovery(generate(mug_spec(seed)));
    EXPECT_GE(mug.ari, 0.9) << "mug seed " << seed;
    EXPECT_FALSE(mug.labeling.per_link_path);
    const auto cab = test::region_recovery(generate(cabinet_spec(seed)));
    EXPECT_GE(cab.ari, 0.9) << "cabinet seed " << seed;
    EXPECT_TRUE(cab.labeling.per_link_path);
    const auto bottle = test::region_recovery(generate(bottle_spec(seed)));
    EXPECT_TRUE(bottle.labeling.used_fallback);
    EXPECT_LT(bottle.labeling.mean_shift_clusters, 5);
    EXPECT_EQ(bottle.labeling.num_regions, 5);
  }
  EXPECT_FALSE(preset("teapot", 0).has_value());
}
