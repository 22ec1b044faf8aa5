#ifndef UAD_METRICS_BASELINES_HPP
#define UAD_METRICS_BASELINES_HPP

#include <algorithm>

#include "uad/core/grid.hpp"

namespace uad::metrics {

// Conventions for scoring baseline predictors with the same harness.

/// Segmentation-style baseline: 1 inside the predicted mask, 0 elsewhere; an
/// absent mask is the all-zero map.
inline Map mask_prediction(const Mask* mask, int height, int width) {
  Map out(height, width);
  if (!mask) return out;
  for (std::size_t i = 0; i < out.pixels(); ++i) out[i] = (*mask)[i] ? 1.0 : 0.0;
  return out;
}

/// Similarity-style baseline: per-pixel cosine scores with negatives set to 0.
inline Map clip_similarity(const Map& cosine) {
  Map out = cosine;
  for (auto& v : out.data) v = std::max(v, 0.0);
  return out;
}

}  // namespace uad::metrics

#endif  // UAD_METRICS_BASELINES_HPP
