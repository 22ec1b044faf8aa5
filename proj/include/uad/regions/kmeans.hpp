#ifndef UAD_REGIONS_KMEANS_HPP
#define UAD_REGIONS_KMEANS_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "uad/core/error.hpp"
#include "uad/core/linalg.hpp"
#include "uad/regions/labels.hpp"

namespace uad::regions {

struct KMeansResult {
  std::vector<int> labels;  // 0..k_used-1, canonical order
  RowMatrix centroids;      // k_used×dim, row i belongs to label i
  double inertia = 0.0;     // within-cluster sum of squares
  int k_used = 0;
  bool reduced_k = false;   // fewer distinct points than requested clusters
  int iterations = 0;
};

namespace detail {

inline double assign(const RowMatrix& x, const RowMatrix& c, std::vector<int>& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const double d = (x.row(i) - c.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    total += best_d;
  }
  return total;
}

}  // namespace detail

/// k-means++ seeding followed by Lloyd iterations until assignments stop
/// changing or `max_iter` is reached.
inline KMeansResult kmeans(const RowMatrix& x, int k, std::uint64_t seed = 0, int max_iter = 100) {
  const Eigen::Index n = x.rows();
  if (k < 1) throw Error("kmeans", "k must be >= 1");
  if (k > n) throw Error("kmeans", "k exceeds the number of points");

  KMeansResult out;
  {
    std::set<std::vector<double>> distinct;
    for (Eigen::Index i = 0; i < n && static_cast<int>(distinct.size()) < k; ++i)
      distinct.insert(std::vector<double>(x.row(i).data(), x.row(i).data() + x.cols()));
    if (static_cast<int>(distinct.size()) < k) {
      k = static_cast<int>(distinct.size());
      out.reduced_k = true;
    }
  }

  std::mt19937_64 rng(seed);
  RowMatrix c(k, x.cols());
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  c.row(0) = x.row(first(rng));
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (x.row(i) - c.row(j - 1)).squaredNorm());
      total += d2[static_cast<std::size_t>(i)];
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      target -= d2[static_cast<std::size_t>(i)];
      if (target <= 0.0 && d2[static_cast<std::size_t>(i)] > 0.0) {
        pick = i;
        break;
      }
    }
    if (d2[static_cast<std::size_t>(pick)] == 0.0) {  // fall back to the farthest point
      pick = static_cast<Eigen::Index>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    }
    c.row(j) = x.row(pick);
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1), prev;
  double inertia = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    prev = labels;
    inertia = detail::assign(x, c, labels);
    if (labels == prev) break;
    RowMatrix sum = RowMatrix::Zero(k, x.cols());
    std::vector<std::size_t> cnt(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++cnt[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < k; ++j) {
      if (cnt[static_cast<std::size_t>(j)] > 0) {
        c.row(j) = sum.row(j) / static_cast<double>(cnt[static_cast<std::size_t>(j)]);
      } else {
        // Empty cluster: move it to the point worst served by its centroid.
        Eigen::Index worst = 0;
        double worst_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d = (x.row(i) - c.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
          if (d > worst_d) {
            worst_d = d;
            worst = i;
          }
        }
        c.row(j) = x.row(worst);
      }
    }
  }
  out.iterations = it;
  inertia = detail::assign(x, c, labels);

  std::vector<int> before = labels;
  out.k_used = canonicalize(labels);
  out.centroids = RowMatrix::Zero(out.k_used, x.cols());
  for (std::size_t i = 0; i < before.size(); ++i) out.centroids.row(labels[i]) = c.row(before[i]);
  out.labels = std::move(labels);
  out.inertia = inertia;
  return out;
}

}  // namespace uad::regions

#endif  // UAD_REGIONS_KMEANS_HPP
