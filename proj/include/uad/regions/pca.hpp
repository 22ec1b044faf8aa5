#ifndef UAD_REGIONS_PCA_HPP
#define UAD_REGIONS_PCA_HPP

#include <vector>

#include <Eigen/Eigenvalues>

#include "uad/fusion/fusion.hpp"

namespace uad::regions {

/// Feature field projected onto its top principal axes.
struct ReducedField {
  RowMatrix coords;         // N×k; rows of invalid points are zero
  Eigen::MatrixXd basis;    // d×k, columns by descending variance
  Vec mean;                 // d
  Vec explained_variance;   // k, sample variance (n-1 denominator)
  bool degenerate = false;  // fewer than k axes with nonzero variance
};

/// PCA over the valid rows of `field`, optionally restricted to `rows`.
///
/// Each axis is signed so that its largest-magnitude entry is positive.
/// Axes beyond the numerical rank are zero columns and set `degenerate`.
inline ReducedField pca_reduce(const fusion::FeatureField& field, int k = 3,
                               const std::vector<std::size_t>* rows = nullptr) {
  std::vector<std::size_t> idx;
  if (rows) {
    for (std::size_t r : *rows)
      if (field.valid(r)) idx.push_back(r);
  } else {
    for (std::size_t r = 0; r < field.size(); ++r)
      if (field.valid(r)) idx.push_back(r);
  }
  const int d = field.dim();
  if (static_cast<int>(idx.size()) < k) throw Error("pca", "fewer valid points than components");

  ReducedField out;
  out.mean = Vec::Zero(d);
  for (std::size_t r : idx) out.mean += field.features.row(static_cast<Eigen::Index>(r)).transpose();
  out.mean /= static_cast<double>(idx.size());

  Eigen::MatrixXd centered(static_cast<Eigen::Index>(idx.size()), d);
  for (std::size_t i = 0; i < idx.size(); ++i)
    centered.row(static_cast<Eigen::Index>(i)) =
        field.features.row(static_cast<Eigen::Index>(idx[i])) - out.mean.transpose();
  const double denom = idx.size() > 1 ? static_cast<double>(idx.size() - 1) : 1.0;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("pca", "eigendecomposition failed");
  const Vec evals = eig.eigenvalues();  // ascending
  const double scale = std::max(evals.cwiseAbs().maxCoeff(), 1.0);

  out.basis = Eigen::MatrixXd::Zero(d, k);
  out.explained_variance = Vec::Zero(k);
  for (int j = 0; j < k && j < d; ++j) {
    const int src = d - 1 - j;
    const double lambda = evals[src];
    if (!(lambda > 1e-12 * scale)) {
      out.degenerate = true;
      continue;
    }
    Vec axis = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis[arg] < 0.0) axis = -axis;
    out.basis.col(j) = axis;
    out.explained_variance[j] = lambda;
  }
  if (k > d) out.degenerate = true;

  out.coords = RowMatrix::Zero(static_cast<Eigen::Index>(field.size()), k);
  for (std::size_t r : idx)
    out.coords.row(static_cast<Eigen::Index>(r)) =
        (field.features.row(static_cast<Eigen::Index>(r)) - out.mean.transpose()) * out.basis;
  return out;
}

}  // namespace uad::regions

#endif  // UAD_REGIONS_PCA_HPP
