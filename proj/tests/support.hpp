#ifndef UAD_TESTS_SUPPORT_HPP
#define UAD_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <openssl/evp.h>

#include "uad/uad.hpp"

namespace uad::test {

/// Fresh, empty scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(UAD_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string sha256(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

inline Map random_map(int h, int w, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Map m(h, w);
  for (auto& v : m.data) v = u(rng);
  return m;
}

/// View of a random depth field seen by a camera at `eye` looking at the origin.
inline geom::CameraView random_view(int h, int w, std::mt19937_64& rng,
                                    const Eigen::Vector3d& eye = {0.3, -0.2, -2.0}) {
  std::uniform_real_distribution<double> depth(1.5, 2.5);
  geom::CameraView v;
  v.intrinsics = geom::pinhole(0.9 * w, 1.1 * w, 0.5 * (w - 1) + 0.3, 0.5 * (h - 1) - 0.2);
  v.extrinsics = geom::look_at(eye, Eigen::Vector3d::Zero());
  v.depth = Map(h, w);
  v.fg_mask = Mask(h, w);
  v.rgb = Rgb(h, w, 3, 200);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if ((r * 7 + c * 3) % 5 != 0) {
        v.depth.at(r, c) = depth(rng);
        v.fg_mask.at(r, c) = 1;
      }
  return v;
}

/// Flattens a synthetic scene into the pieces the pipeline consumes.
struct SceneData {
  std::vector<geom::CameraView> views;
  std::vector<fusion::ViewFeatures> features;
  std::vector<LabelMap> parts;
};

inline SceneData scene_data(const synth::Scene& s) {
  SceneData d;
  for (const auto& v : s.views) {
    d.views.push_back(v.view);
    d.features.push_back(v.features);
    d.parts.push_back(v.part_ids);
  }
  return d;
}


/// Straight per-point, per-view loop with scalar arithmetic. Reference for
/// fuse_features.
inline fusion::FeatureField reference_fuse(const geom::PointCloud& cloud,
                                           const std::vector<geom::CameraView>& views,
                                           const std::vector<fusion::ViewFeatures>& feats, double tol) {
  const int d = feats.front().channels;
  fusion::FeatureField out;
  out.features = RowMatrix::Zero(static_cast<Eigen::Index>(cloud.size()), d);
  out.visible_count.assign(cloud.size(), 0);
  for (std::size_t n = 0; n < cloud.size(); ++n) {
    std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
    int count = 0;
    for (std::size_t v = 0; v < views.size(); ++v) {
      const auto& e = views[v].extrinsics;
      const auto& k = views[v].intrinsics;
      double q[3], pc[3];
      for (int i = 0; i < 3; ++i) q[i] = cloud.points[n][i] - e(i, 3);
      for (int i = 0; i < 3; ++i) pc[i] = e(0, i) * q[0] + e(1, i) * q[1] + e(2, i) * q[2];
      if (!(pc[2] > 0.0)) continue;
      const double x = pc[0] / pc[2], y = pc[1] / pc[2];
      const double u = k(0, 0) * x + k(0, 1) * y + k(0, 2);
      const double vv = k(1, 1) * y + k(1, 2);
      const long r = std::lround(vv), c = std::lround(u);
      if (r < 0 || c < 0 || r >= views[v].height() || c >= views[v].width()) continue;
      const double depth = views[v].depth.at(static_cast<int>(r), static_cast<int>(c));
      if (!(depth > 0.0) || std::abs(pc[2] - depth) > tol) continue;
      for (int j = 0; j < d; ++j) acc[static_cast<std::size_t>(j)] += static_cast<double>(feats[v].at(static_cast<int>(r), static_cast<int>(c), j));
      ++count;
    }
    out.visible_count[n] = count;
    for (int j = 0; j < d; ++j)
      out.features(static_cast<Eigen::Index>(n), j) = count > 0 ? acc[static_cast<std::size_t>(j)] / count : 0.0;
  }
  return out;
}

/// Random scene: a cloud sampled from the union of the views' surfaces plus
/// points floating in free space, with random per-pixel features.
struct RandomScene {
  geom::PointCloud cloud;
  std::vector<geom::CameraView> views;
  std::vector<fusion::ViewFeatures> feats;
};

inline RandomScene random_scene(std::mt19937_64& rng, int views, int h, int w, int d, std::size_t max_points) {
  RandomScene s;
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int v = 0; v < views; ++v) {
    Eigen::Vector3d eye(n01(rng), n01(rng), n01(rng));
    eye = eye.normalized() * 2.0;
    s.views.push_back(random_view(h, w, rng, eye));
    fusion::ViewFeatures f(h, w, d);
    for (auto& x : f.data) x = static_cast<float>(n01(rng));
    s.feats.push_back(std::move(f));
  }
  s.cloud = geom::downsample(geom::aggregate_scene(s.views), max_points);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 20 && s.cloud.size() < max_points; ++i) s.cloud.push_back({u(rng), u(rng), u(rng)}, -1, -1, -1);
  return s;
}

/// Fused object ready for annotation. With `gt_regions` the labeling is the
/// generator's part assignment (region k+1 = part k) instead of clustering.
inline annotate::ObjectScene object_scene(const synth::Scene& s, std::size_t points = 1500, bool gt_regions = true) {
  const auto data = scene_data(s);
  annotate::ObjectScene o;
  o.object_id = s.spec.object_id;
  o.category = s.spec.category;
  o.views = data.views;
  for (const auto& v : s.views) o.view_scores.push_back(v.score);
  o.cloud = geom::downsample(geom::aggregate_scene(data.views), points);
  o.field = fusion::fuse_features(o.cloud, data.views, data.features);
  if (gt_regions) {
    const auto parts = synth::point_part_labels(o.cloud, data.parts);
    o.labeling.num_regions = static_cast<int>(s.spec.parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) o.labeling.labels.push_back(o.field.valid(i) ? parts[i] + 1 : 0);
  } else {
    o.labeling = regions::propose_regions(o.field, o.cloud);
  }
  return o;
}

/// Clusters a synthetic scene and scores the regions against the generator's
/// part labels over points that are both visible and labeled.
struct Recovery {
  regions::RegionLabeling labeling;
  double ari = 0.0;
};

inline Recovery region_recovery(const synth::Scene& s, std::size_t points = 1500) {
  const annotate::ObjectScene o = object_scene(s, points, false);
  const auto parts = synth::point_part_labels(o.cloud, scene_data(s).parts);
  std::vector<int> truth, found;
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (parts[i] >= 0 && o.labeling.labels[i] > 0) {
      truth.push_back(parts[i]);
      found.push_back(o.labeling.labels[i]);
    }
  return {o.labeling, regions::adjusted_rand_index(truth, found)};
}

/// Decoder with every parameter drawn from N(0, scale²).
inline decoder::FilmDecoder random_decoder(int d, int e, const std::vector<int>& plan, std::uint64_t seed,
                                           double scale = 0.5) {
  auto dec = decoder::make_decoder(d, e, seed, decoder::FilmInit::kIdentity, plan);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& [name, s] : decoder::parameters(dec))
    for (double& v : s) v = n(rng);
  return dec;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
  std::size_t kinks = 0;  // parameters whose ±h probe flips a ReLU; not compared
};

/// Central finite differences of the mean BCE loss against backward() for
/// the given parameters (every parameter when `stride` is 1). Relative error is
/// |a − n| / max(|a|, |n|, floor). A probe that moves any hidden
/// pre-activation across zero straddles a kink where the loss is not
/// differentiable; such parameters are counted in `kinks` instead.
inline GradCheck gradient_check(decoder::FilmDecoder dec, const RowMatrix& x, const Vec& e,
                                const std::vector<double>& target, double h = 1e-4, double floor = 1e-6,
                                std::size_t stride = 1) {
  auto grads = decoder::zeros_like(dec);
  decoder::loss_and_gradients(dec, x, e, target, grads);
  auto pattern = [](const decoder::ForwardCache& c) {
    std::vector<bool> on;
    for (std::size_t l = 0; l + 1 < c.modulated.size(); ++l)
      for (double v : c.modulated[l].reshaped()) on.push_back(v > 0.0);
    return on;
  };
  const auto base = pattern(decoder::film_forward(dec, x, e));
  bool crossed = false;
  auto loss = [&] {
    const auto c = decoder::film_forward(dec, x, e);
    crossed = crossed || pattern(c) != base;
    return decoder::bce_loss({c.logits.data(), static_cast<std::size_t>(c.logits.size())}, target);
  };
  GradCheck out;
  auto params = decoder::parameters(dec);
  auto analytic = decoder::parameters(grads);
  std::size_t flat = 0;
  for (std::size_t j = 0; j < params.size(); ++j) {
    auto& p = params[j].second;
    for (std::size_t i = 0; i < p.size(); ++i, ++flat) {
      if (flat % stride != 0) continue;
      const double keep = p[i];
      crossed = false;
      p[i] = keep + h;
      const double up = loss();
      p[i] = keep - h;
      const double down = loss();
      p[i] = keep;
      if (crossed) {
        ++out.kinks;
        continue;
      }
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[j].second[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = params[j].first + "[" + std::to_string(i) + "]";
      }
      ++out.checked;
    }
  }
  return out;
}

/// Gradient-check fixture: inputs are redrawn (deterministically) until no
/// probe straddles a ReLU kink, so every parameter gets compared.
inline GradCheck gradient_check_seed(std::uint64_t seed, int d, int e, int pixels, const std::vector<int>& plan,
                                     double h = 1e-4) {
  const auto dec = random_decoder(d, e, plan, seed);
  std::mt19937_64 rng(derive_seed(seed, "gradcheck/data"));
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GradCheck out;
  for (int attempt = 0; attempt < 20; ++attempt) {
    RowMatrix x(pixels, d);
    for (auto& v : x.reshaped()) v = n01(rng);
    Vec emb(e);
    for (auto& v : emb) v = n01(rng);
    std::vector<double> t(static_cast<std::size_t>(pixels));
    for (auto& v : t) v = u(rng);
    out = gradient_check(dec, x, emb, t, h);
    if (out.kinks == 0) break;
  }
  return out;
}

// Scalar metric oracles, written independently of uad::metrics.

/// Area under the explicit ROC polyline (threshold sweep, trapezoids).
inline double oracle_auc(const Map& pred, const Map& gt, double gt_threshold = 0.5) {
  std::vector<double> thresholds(pred.data);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double pos = 0, neg = 0;
  for (double g : gt.data) (g > gt_threshold ? pos : neg) += 1;
  double area = 0, fpr0 = 0, tpr0 = 0;
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < pred.pixels(); ++i)
      if (pred[i] >= t) (gt[i] > gt_threshold ? tp : fp) += 1;
    const double fpr = fp / neg, tpr = tp / pos;
    area += (fpr - fpr0) * (tpr + tpr0) / 2;
    fpr0 = fpr;
    tpr0 = tpr;
  }
  return area;
}

inline double oracle_kld(const Map& pred, const Map& gt, double eps = 1e-6) {
  std::vector<double> p(pred.pixels()), q(gt.pixels());
  double ps = 0, qs = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = pred[i] < eps ? eps : (pred[i] > 1 - eps ? 1 - eps : pred[i]);
    ps += p[i];
    qs += gt[i];
  }
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double g = gt[i] / qs;
    if (g != 0) s += g * (std::log(g) - std::log(p[i] / ps));
  }
  return s;
}

inline double oracle_sim(const Map& pred, const Map& gt) {
  double ps = 0, qs = 0;
  for (std::size_t i = 0; i < pred.pixels(); ++i) {
    ps += pred[i];
    qs += gt[i];
  }
  double s = 0;
  for (std::size_t i = 0; i < pred.pixels(); ++i) {
    const double a = pred[i] / ps, b = gt[i] / qs;
    s += a < b ? a : b;
  }
  return s;
}

inline double oracle_nss(const Map& pred, const Map& gt, double threshold) {
  const auto n = static_cast<double>(pred.pixels());
  double mean = 0;
  for (double v : pred.data) mean += v / n;
  double ss = 0;
  for (double v : pred.data) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  std::vector<double> z;
  for (double v : pred.data) z.push_back((v - mean) / sd);
  double s = 0, k = 0;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (gt[i] > threshold) {
      s += z[i];
      k += 1;
    }
  return s / k;
}

inline Mask oracle_votes(const std::vector<Mask>& stack) {
  Mask out(stack[0].height, stack[0].width);
  for (int r = 0; r < out.height; ++r)
    for (int c = 0; c < out.width; ++c) {
      int count = 0;
      for (const auto& m : stack) count += m.at(r, c) != 0;
      out.at(r, c) = count >= 4;
    }
  return out;
}

}  // namespace uad::test

#endif  // UAD_TESTS_SUPPORT_HPP
