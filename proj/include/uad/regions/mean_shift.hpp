#ifndef UAD_REGIONS_MEAN_SHIFT_HPP
#define UAD_REGIONS_MEAN_SHIFT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "uad/core/error.hpp"
#include "uad/core/linalg.hpp"
#include "uad/regions/labels.hpp"

namespace uad::regions {

struct MeanShiftResult {
  std::vector<int> labels;  // 0..count-1, canonical order
  int count = 0;
  RowMatrix modes;          // count×k, row i is the mode of cluster i
};

/// Quantile of pairwise Euclidean distances over a seeded subsample of rows.
inline double estimate_bandwidth(const RowMatrix& x, double quantile = 0.25,
                                 std::size_t sample = 512, std::uint64_t seed = 0) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) return 1.0;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (n > sample) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(sample);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<double> dist;
  dist.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j)
      dist.push_back((x.row(static_cast<Eigen::Index>(idx[i])) -
                      x.row(static_cast<Eigen::Index>(idx[j]))).norm());
  const auto q = static_cast<std::size_t>(
      std::clamp(quantile, 0.0, 1.0) * static_cast<double>(dist.size() - 1));
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(q), dist.end());
  return dist[q] > 0.0 ? dist[q] : 1.0;
}

/// Flat-kernel mean shift.
///
/// Seeds are the centers of bandwidth-sized bins holding at least
/// `min_bin_freq` points. Each seed climbs to
/// the mean of the points within `bandwidth` until the shift falls below
/// 1e-3·bandwidth. Modes are visited by descending support and any mode within
/// bandwidth/2 of an already kept one is merged into it. Points take the label
/// of their nearest kept mode.
inline MeanShiftResult mean_shift(const RowMatrix& x, double bandwidth, int max_iter = 300,
                                  std::size_t min_bin_freq = 1) {
  if (!(bandwidth > 0.0)) throw Error("mean_shift", "bandwidth must be > 0");
  const Eigen::Index n = x.rows(), k = x.cols();
  MeanShiftResult out;
  if (n == 0) return out;

  std::map<std::vector<std::int64_t>, int> bins;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::int64_t> key(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j)
      key[static_cast<std::size_t>(j)] = std::llround(x(i, j) / bandwidth);
    ++bins[key];
  }

  const double r2 = bandwidth * bandwidth;
  struct Mode {
    Vec center;
    std::size_t support;
    std::size_t order;
  };
  std::vector<Mode> modes;
  for (const auto& [key, cnt] : bins) {
    if (static_cast<std::size_t>(cnt) < min_bin_freq) continue;
    Vec c(k);
    for (Eigen::Index j = 0; j < k; ++j) c[j] = static_cast<double>(key[static_cast<std::size_t>(j)]) * bandwidth;
    std::size_t support = 0;
    for (int it = 0; it < max_iter; ++it) {
      Vec sum = Vec::Zero(k);
      std::size_t m = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((x.row(i).transpose() - c).squaredNorm() <= r2) {
          sum += x.row(i).transpose();
          ++m;
        }
      }
      support = m;
      if (m == 0) break;
      const Vec next = sum / static_cast<double>(m);
      const double shift = (next - c).norm();
      c = next;
      if (shift < 1e-3 * bandwidth) break;
    }
    if (support > 0) modes.push_back({c, support, modes.size()});
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const Mode& a, const Mode& b) { return a.support > b.support; });

  std::vector<Vec> kept;
  const double merge2 = 0.25 * r2;
  for (const auto& m : modes) {
    bool near = false;
    for (const auto& c : kept)
      if ((c - m.center).squaredNorm() < merge2) {
        near = true;
        break;
      }
    if (!near) kept.push_back(m.center);
  }
  if (kept.empty()) kept.push_back(x.colwise().mean().transpose());

  out.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kept.size(); ++c) {
      const double d = (x.row(i).transpose() - kept[c]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    out.labels[static_cast<std::size_t>(i)] = best;
  }
  // Drop modes that attracted no points, then order canonically.
  std::vector<int> before = out.labels;
  out.count = canonicalize(out.labels);
  out.modes = RowMatrix::Zero(out.count, k);
  for (std::size_t i = 0; i < before.size(); ++i)
    out.modes.row(out.labels[i]) = kept[static_cast<std::size_t>(before[i])].transpose();
  return out;
}

}  // namespace uad::regions

#endif  // UAD_REGIONS_MEAN_SHIFT_HPP
