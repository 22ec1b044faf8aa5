#ifndef UAD_METRICS_SALIENCY_HPP
#define UAD_METRICS_SALIENCY_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "uad/core/error.hpp"
#include "uad/core/grid.hpp"

namespace uad::metrics {

/// Metric outcome. `defined` is false when the inputs make the metric
/// meaningless (e.g. single-class ground truth for AUC); `flagged` marks a
/// degenerate input that was scored by convention (value 0).
struct Metric {
  double value = 0.0;
  bool defined = true;
  bool flagged = false;

  static Metric absent() { return {0.0, false, false}; }
  static Metric degenerate() { return {0.0, true, true}; }
};

namespace detail {

inline void require_same_shape(const Map& a, const Map& b) {
  if (!a.same_shape(b)) throw Error("metrics", "prediction and ground truth differ in shape");
}

inline double sum(const Map& m) { return std::accumulate(m.data.begin(), m.data.end(), 0.0); }

}  // namespace detail

/// Rank-based (Mann-Whitney) ROC AUC of `prediction` as a score for the
/// binary mask `gt > gt_threshold`. Tied scores receive their average rank.
inline Metric auc(const Map& prediction, const Map& gt, double gt_threshold = 0.5) {
  detail::require_same_shape(prediction, gt);
  const std::size_t n = prediction.pixels();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return prediction[a] < prediction[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && prediction[order[j]] == prediction[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (gt[order[k]] > gt_threshold) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return Metric::absent();
  const double np = static_cast<double>(n_pos);
  return {(pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg))};
}

/// KL(gt || prediction) after clipping the prediction to [eps, 1-eps] and
/// normalizing both maps to unit sum. Terms with gt = 0 contribute 0.
inline Metric kld(const Map& prediction, const Map& gt, double eps = 1e-6) {
  detail::require_same_shape(prediction, gt);
  const double gs = detail::sum(gt);
  if (!(gs > 0.0)) return Metric::absent();
  Map p = prediction;
  for (auto& v : p.data) v = std::clamp(v, eps, 1.0 - eps);
  const double ps = detail::sum(p);
  double s = 0.0;
  for (std::size_t i = 0; i < gt.pixels(); ++i) {
    const double g = gt[i] / gs;
    if (g > 0.0) s += g * std::log(g / (p[i] / ps));
  }
  return {s};
}

/// Histogram intersection of the two maps after unit-sum normalization.
inline Metric sim(const Map& prediction, const Map& gt) {
  detail::require_same_shape(prediction, gt);
  const double ps = detail::sum(prediction), gs = detail::sum(gt);
  if (!(ps > 0.0) || !(gs > 0.0)) return Metric::degenerate();
  double s = 0.0;
  for (std::size_t i = 0; i < gt.pixels(); ++i) s += std::min(prediction[i] / ps, gt[i] / gs);
  return {s};
}

/// Normalized scanpath saliency: mean of the standardized prediction (zero
/// mean, unit population std over all pixels) over pixels with gt > threshold.
inline Metric nss(const Map& prediction, const Map& gt, double threshold = 0.1) {
  detail::require_same_shape(prediction, gt);
  const auto n = static_cast<double>(prediction.pixels());
  std::size_t fix = 0;
  for (double g : gt.data) fix += g > threshold ? 1 : 0;
  if (fix == 0) return Metric::absent();
  const double mean = detail::sum(prediction) / n;
  double var = 0.0;
  for (double v : prediction.data) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  const auto [lo, hi] = std::minmax_element(prediction.data.begin(), prediction.data.end());
  if (*lo == *hi || !(sd > 0.0)) return Metric::degenerate();
  double s = 0.0;
  for (std::size_t i = 0; i < gt.pixels(); ++i)
    if (gt[i] > threshold) s += (prediction[i] - mean) / sd;
  return {s / static_cast<double>(fix)};
}

}  // namespace uad::metrics

#endif  // UAD_METRICS_SALIENCY_HPP
