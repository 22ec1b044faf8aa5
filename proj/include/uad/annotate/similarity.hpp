#ifndef UAD_ANNOTATE_SIMILARITY_HPP
#define UAD_ANNOTATE_SIMILARITY_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "uad/fusion/fusion.hpp"
#include "uad/geom/raster.hpp"
#include "uad/regions/propose.hpp"

namespace uad::annotate {

/// Index of the best-scoring view; ties go to the lowest index.
inline std::size_t select_canonical_view(std::span<const double> scores) {
  if (scores.empty()) throw Error("annotate", "no views to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

inline constexpr double kMinReferenceNorm = 1e-9;

struct ReferenceFeature {
  Vec feature;
  bool near_zero = false;  // norm below kMinReferenceNorm
};

/// Mean fused feature of the points in `region`.
inline ReferenceFeature reference_feature(const fusion::FeatureField& field,
                                          const regions::RegionLabeling& labeling, int region) {
  Vec sum = Vec::Zero(field.dim());
  std::size_t n = 0;
  for (std::size_t i = 0; i < labeling.labels.size(); ++i) {
    if (labeling.labels[i] != region || !field.valid(i)) continue;
    sum += field.features.row(static_cast<Eigen::Index>(i)).transpose();
    ++n;
  }
  if (n == 0) throw Error("annotate", "region " + std::to_string(region) + " has no points");
  ReferenceFeature out{sum / static_cast<double>(n), false};
  out.near_zero = out.feature.norm() < kMinReferenceNorm;
  return out;
}

/// Per-point cosine similarity to `ref`, negatives clipped to 0. Unseen
/// points and zero-norm rows score 0.
inline std::vector<double> similarity_scores(const fusion::FeatureField& field, const Vec& ref) {
  const double rn = ref.norm();
  if (rn < kMinReferenceNorm) throw Error("annotate", "reference feature norm is ~0");
  std::vector<double> out(field.size(), 0.0);
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!field.valid(i)) continue;
    const auto row = field.features.row(static_cast<Eigen::Index>(i));
    const double fn = row.norm();
    if (fn == 0.0) continue;
    out[i] = std::clamp(row.dot(ref) / (fn * rn), 0.0, 1.0);
  }
  return out;
}

/// Per-view affordance map: each foreground pixel takes the score of the cloud
/// point nearest to its backprojection; background is 0.
inline Map build_affordance_map(std::span<const double> scores, const geom::CameraView& view,
                                const geom::SpatialIndex& index) {
  return geom::label_pixels_by_nn<double>(view, index, scores, 0.0);
}

}  // namespace uad::annotate

#endif  // UAD_ANNOTATE_SIMILARITY_HPP
