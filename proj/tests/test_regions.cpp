#include <gtest/gtest.h>

#include "support.hpp"

using namespace uad;
using namespace uad::regions;

namespace {

fusion::FeatureField field_of(const RowMatrix& x) {
  fusion::FeatureField f;
  f.features = x;
  f.visible_count.assign(static_cast<std::size_t>(x.rows()), 1);
  return f;
}

geom::PointCloud dummy_cloud(std::size_t n, int link = -1) {
  geom::PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.push_back(Eigen::Vector3d::Zero(), 0, static_cast<int>(i), link);
  return c;
}

// Gaussian blobs around the given centers; `truth` receives the blob index.
RowMatrix blobs(const std::vector<Eigen::VectorXd>& centers, const std::vector<int>& counts, double sigma,
                std::mt19937_64& rng, std::vector<int>& truth) {
  const auto d = centers.front().size();
  const int n = std::accumulate(counts.begin(), counts.end(), 0);
  RowMatrix x(n, d);
  std::normal_distribution<double> g(0.0, sigma);
  truth.clear();
  int row = 0;
  for (std::size_t b = 0; b < centers.size(); ++b)
    for (int i = 0; i < counts[b]; ++i, ++row) {
      for (Eigen::Index k = 0; k < d; ++k) x(row, k) = centers[b][k] + g(rng);
      truth.push_back(static_cast<int>(b));
    }
  return x;
}

Eigen::VectorXd v3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

double inertia_of(const RowMatrix& x, const std::vector<int>& labels, int k) {
  RowMatrix c = RowMatrix::Zero(k, x.cols());
  std::vector<int> n(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    c.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    ++n[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  for (int j = 0; j < k; ++j)
    if (n[static_cast<std::size_t>(j)]) c.row(j) /= n[static_cast<std::size_t>(j)];
  double s = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) s += (x.row(i) - c.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return s;
}

// Plain Lloyd from k distinct random rows.
double lloyd_restart(const RowMatrix& x, int k, std::mt19937_64& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  RowMatrix c(k, x.cols());
  for (int j = 0; j < k; ++j) c.row(j) = x.row(idx[static_cast<std::size_t>(j)]);
  std::vector<int> labels(static_cast<std::size_t>(x.rows()), -1);
  for (int it = 0; it < 200; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      Eigen::Index best;
      (c.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (labels[static_cast<std::size_t>(i)] != best) changed = true;
      labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    if (!changed) break;
    RowMatrix sum = RowMatrix::Zero(k, x.cols());
    std::vector<int> n(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      sum.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++n[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < k; ++j)
      if (n[static_cast<std::size_t>(j)]) c.row(j) = sum.row(j) / n[static_cast<std::size_t>(j)];
  }
  return inertia_of(x, labels, k);
}

}  // namespace

TEST(Canonicalize, OrdersBySizeThenFirstIndex) {
  std::vector<int> l{7, 3, 3, 9, 9, -1, 9, 7};
  EXPECT_EQ(canonicalize(l), 3);
  EXPECT_EQ(l, (std::vector<int>{1, 2, 2, 0, 0, -1, 0, 1}));
}

TEST(Pca, ZeroVarianceIsDegenerate) {
  const RowMatrix x = RowMatrix::Constant(10, 4, 0.3);
  const auto r = pca_reduce(field_of(x), 3);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.coords.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pca, DiagonalCovariance) {
  const double a = std::sqrt(3.0), b = a / 2, c = a / 4;
  RowMatrix x(4, 3);
  // Mutually orthogonal zero-mean columns with sample variances 4, 1, 0.25
  // listed in scrambled axis order.
  x << c, b, a, -c, -b, a, -c, b, -a, c, -b, -a;
  const auto r = pca_reduce(field_of(x), 3);
  EXPECT_FALSE(r.degenerate);
  EXPECT_NEAR(r.explained_variance[0], 4.0, 1e-12);
  EXPECT_NEAR(r.explained_variance[1], 1.0, 1e-12);
  EXPECT_NEAR(r.explained_variance[2], 0.25, 1e-12);
  for (int j = 0; j < 3; ++j) {
    const int src = 2 - j;
    const double sign = r.basis(src, j) > 0 ? 1.0 : -1.0;
    EXPECT_NEAR(std::abs(r.basis(src, j)), 1.0, 1e-12);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.coords(i, j), sign * x(i, src), 1e-12);
  }
}

TEST(Pca, MatchesSvdOracle) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n01(0, 1);
  RowMatrix x(50, 16);
  for (Eigen::Index j = 0; j < 16; ++j)
    for (Eigen::Index i = 0; i < 50; ++i) x(i, j) = n01(rng) * (1.0 + 0.3 * static_cast<double>(j));
  const auto r = pca_reduce(field_of(x), 3);

  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd axis = svd.matrixV().col(j);
    Eigen::Index arg;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis[arg] < 0) axis = -axis;
    EXPECT_NEAR(r.explained_variance[j], svd.singularValues()[j] * svd.singularValues()[j] / 49.0, 1e-8);
    EXPECT_LT((r.basis.col(j) - axis).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((r.coords.col(j) - centered * axis).cwiseAbs().maxCoeff(), 1e-8);
  }
  EXPECT_LT((r.basis.transpose() * r.basis - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((r.coords - (x.rowwise() - r.mean.transpose()) * r.basis).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, ReconstructionErrorShrinksWithK) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01(0, 1);
  RowMatrix x(40, 6);
  for (auto& v : x.reshaped()) v = n01(rng);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 6; ++k) {
    const auto r = pca_reduce(field_of(x), k);
    const RowMatrix rec = (r.coords * r.basis.transpose()).rowwise() + r.mean.transpose();
    const double err = (rec - x).squaredNorm();
    EXPECT_LE(err, prev + 1e-12);
    prev = err;
  }
  EXPECT_LT(prev, 1e-18 * 40 * 6 + 1e-18);
}

TEST(Pca, SkipsInvalidRowsAndNeedsK) {
  RowMatrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  auto f = field_of(x);
  f.visible_count = {1, 0, 1};
  EXPECT_THROW(pca_reduce(f, 3), Error);
  const auto r = pca_reduce(f, 1);
  EXPECT_DOUBLE_EQ(r.mean[0], 3.0);
  EXPECT_EQ(r.coords(1, 0), 0.0);
}

TEST(MeanShift, TwoSeparatedBlobs) {
  std::mt19937_64 rng(19);
  std::vector<int> truth;
  const auto x = blobs({v3(0, 0, 0), v3(10, 0, 0)}, {60, 40}, 0.1, rng, truth);
  const auto r = mean_shift(x, 1.0);
  ASSERT_EQ(r.count, 2);
  EXPECT_EQ(r.labels, truth);
}

TEST(MeanShift, CoincidentPoints) {
  const auto r = mean_shift(RowMatrix::Constant(25, 3, 2.0), 0.5);
  EXPECT_EQ(r.count, 1);
  EXPECT_EQ(std::count(r.labels.begin(), r.labels.end(), 0), 25);
}

TEST(MeanShift, ThreeGaussianMixture) {
  std::mt19937_64 rng(23);
  std::vector<int> truth;
  const auto x = blobs({v3(0, 0, 0), v3(4, 0, 0), v3(0, 4, 1)}, {100, 100, 100}, 0.5, rng, truth);
  const double bw = estimate_bandwidth(x, 0.25);
  const auto r = mean_shift(x, bw);
  EXPECT_GE(adjusted_rand_index(r.labels, truth), 0.9);
}

TEST(MeanShift, MinBinFrequencyDropsSparseSeeds) {
  std::mt19937_64 rng(29);
  std::vector<int> truth;
  auto x = blobs({v3(0, 0, 0), v3(10, 0, 0)}, {100, 100}, 0.1, rng, truth);
  x.conservativeResize(201, 3);
  x.row(200) << 5, 5, 5;
  EXPECT_EQ(mean_shift(x, 1.0).count, 3);
  const auto r = mean_shift(x, 1.0, 300, 2);
  EXPECT_EQ(r.count, 2);
  EXPECT_GE(r.labels[200], 0);
}

TEST(MeanShift, RejectsNonPositiveBandwidth) { EXPECT_THROW(mean_shift(RowMatrix::Zero(3, 2), 0.0), Error); }

TEST(KMeans, SingleClusterCentroidIsMean) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n01(0, 1);
  RowMatrix x(30, 3);
  for (auto& v : x.reshaped()) v = n01(rng);
  const auto r = kmeans(x, 1);
  EXPECT_EQ(r.k_used, 1);
  EXPECT_LT((r.centroids.row(0) - x.colwise().mean()).norm(), 1e-12);
}

TEST(KMeans, RecoversSeparatedBlobs) {
  std::mt19937_64 rng(37);
  std::vector<int> truth;
  const auto x = blobs({v3(0, 0, 0), v3(9, 0, 0), v3(0, 9, 0), v3(0, 0, 9), v3(9, 9, 9)}, {50, 45, 40, 35, 30}, 0.3,
                       rng, truth);
  const auto r = kmeans(x, 5, 4);
  EXPECT_EQ(r.labels, truth);
}

TEST(KMeans, CompetitiveWithRandomRestarts) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 1);
  RowMatrix x(200, 3);
  for (auto& v : x.reshaped()) v = u(rng);
  const auto r = kmeans(x, 5, 1);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 50; ++i) best = std::min(best, lloyd_restart(x, 5, rng));
  EXPECT_NEAR(r.inertia, inertia_of(x, r.labels, 5), 1e-9);
  EXPECT_LE(r.inertia, 1.05 * best);
}

TEST(KMeans, ReducesKForDuplicates) {
  RowMatrix x(6, 2);
  x << 0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1;
  const auto r = kmeans(x, 4);
  EXPECT_TRUE(r.reduced_k);
  EXPECT_EQ(r.k_used, 2);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 1, 1, 0, 1}));
}

TEST(KMeans, SameSeedSameResult) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0, 1);
  RowMatrix x(100, 3);
  for (auto& v : x.reshaped()) v = u(rng);
  EXPECT_EQ(kmeans(x, 4, 9).labels, kmeans(x, 4, 9).labels);
}

TEST(Ari, ReferenceValues) {
  // Values produced by sklearn.metrics.adjusted_rand_score.
  EXPECT_NEAR(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0, 1e-15);
  EXPECT_NEAR(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}), 1.0, 1e-15);
  EXPECT_NEAR(adjusted_rand_index({0, 0, 1, 2}, {0, 0, 1, 1}), 0.5714285714285715, 1e-15);
  EXPECT_NEAR(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 2}), 0.5714285714285715, 1e-15);
  EXPECT_NEAR(adjusted_rand_index({0, 0, 0, 0}, {0, 1, 2, 3}), 0.0, 1e-15);
  EXPECT_NEAR(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}), -0.5, 1e-15);
}

TEST(Propose, TwoUniformLinksGiveTwoRegions) {
  RowMatrix x(40, 4);
  x.topRows(25).setConstant(1.0);
  x.bottomRows(15).setConstant(-2.0);
  auto cloud = dummy_cloud(40);
  for (int i = 0; i < 40; ++i) cloud.link_id[static_cast<std::size_t>(i)] = i < 25 ? 3 : 7;
  const auto l = propose_regions(field_of(x), cloud);
  EXPECT_TRUE(l.per_link_path);
  EXPECT_FALSE(l.used_fallback);
  EXPECT_EQ(l.num_regions, 2);
  for (int i = 0; i < 40; ++i) EXPECT_EQ(l.labels[static_cast<std::size_t>(i)], i < 25 ? 1 : 2);
  EXPECT_EQ(l.per_link.at(3), std::make_pair(1, 1));
  EXPECT_EQ(l.per_link.at(7), std::make_pair(2, 2));
}

TEST(Propose, FewModesFallBackToFiveClusters) {
  std::mt19937_64 rng(47);
  std::vector<int> truth;
  const auto x = blobs({v3(0, 0, 0), v3(10, 0, 0), v3(0, 10, 0)}, {120, 100, 80}, 0.5, rng, truth);
  const auto l = propose_regions(field_of(x), dummy_cloud(300));
  EXPECT_EQ(l.mean_shift_clusters, 3);
  EXPECT_TRUE(l.used_fallback);
  EXPECT_EQ(l.num_regions, 5);
  EXPECT_EQ(*std::min_element(l.labels.begin(), l.labels.end()), 1);
  EXPECT_EQ(*std::max_element(l.labels.begin(), l.labels.end()), 5);
}

TEST(Propose, ManyModesAreKept) {
  std::mt19937_64 rng(53);
  std::vector<int> truth;
  // One dominant blob keeps the bandwidth quantile at within-blob scale.
  const auto x = blobs({v3(0, 0, 0), v3(12, 0, 0), v3(-12, 0, 0), v3(0, 12, 0), v3(0, -12, 0), v3(0, 0, 12),
                        v3(0, 0, -12)},
                       {400, 40, 40, 40, 40, 40, 40}, 0.4, rng, truth);
  const auto l = propose_regions(field_of(x), dummy_cloud(640));
  EXPECT_FALSE(l.used_fallback);
  EXPECT_EQ(l.mean_shift_clusters, 7);
  EXPECT_EQ(l.num_regions, 7);
  std::vector<int> got(l.labels.begin(), l.labels.end());
  EXPECT_DOUBLE_EQ(adjusted_rand_index(got, truth), 1.0);
}

TEST(Propose, InvalidPointsGetLabelZero) {
  std::mt19937_64 rng(59);
  std::vector<int> truth;
  const auto x = blobs({v3(0, 0, 0), v3(10, 0, 0)}, {50, 50}, 0.5, rng, truth);
  auto f = field_of(x);
  f.visible_count[4] = 0;
  const auto l = propose_regions(f, dummy_cloud(100));
  EXPECT_EQ(l.labels[4], 0);
  for (std::size_t i = 0; i < 100; ++i)
    if (i != 4) {
      EXPECT_GE(l.labels[i], 1);
    }
}

TEST(Propose, InvariantToRigidFeatureTransform) {
  std::mt19937_64 rng(61);
  std::vector<int> truth;
  const auto x = blobs({v3(0, 0, 0), v3(10, 0, 0), v3(0, 10, 0)}, {120, 100, 80}, 0.5, rng, truth);
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  const RowMatrix y = (x * rot.transpose()).rowwise() + Eigen::RowVector3d(5, -3, 2);
  const auto a = propose_regions(field_of(x), dummy_cloud(300));
  const auto b = propose_regions(field_of(y), dummy_cloud(300));
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a.labels, b.labels), 1.0);
}

TEST(Overlay, SingleRegionPaintsEveryForegroundPixel) {
  std::mt19937_64 rng(67);
  const auto v = test::random_view(8, 8, rng);
  const auto cloud = geom::backproject_view(v);
  RegionLabeling l;
  l.labels.assign(cloud.size(), 1);
  l.num_regions = 1;
  const auto o = render_region_overlay(l, v, geom::SpatialIndex(cloud.points));
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) {
      if (!v.fg_mask.at(r, c)) {
        EXPECT_EQ(o.pixel_labels.at(r, c), 0);
        for (int k = 0; k < 3; ++k) EXPECT_EQ(o.image.at(r, c, k), v.rgb.at(r, c, k));
        continue;
      }
      EXPECT_EQ(o.pixel_labels.at(r, c), 1);
      EXPECT_EQ(decode_overlay_slot(&o.image.at(r, c, 0), &v.rgb.at(r, c, 0)), 0);
    }
  ASSERT_EQ(o.legend.size(), 1u);
  EXPECT_EQ(o.legend[0].point_count, cloud.size());
}

TEST(Overlay, CubeFacesMatchLinearScan) {
  synth::SynthSpec spec;
  spec.parts = {{.name = "cube", .link_id = 0, .primitives = {synth::box({0, 0, 0}, {0.5, 0.5, 0.5})}}};
  spec.width = spec.height = 24;
  spec.cameras.count = 3;
  const auto scene = synth::generate(spec);
  const auto data = test::scene_data(scene);
  const auto cloud = geom::downsample(geom::aggregate_scene(data.views), 500);
  RegionLabeling l;
  l.num_regions = 6;
  for (const auto& p : cloud.points) {
    Eigen::Index axis;
    p.cwiseAbs().maxCoeff(&axis);
    l.labels.push_back(static_cast<int>(2 * axis + (p[axis] > 0 ? 1 : 2)));
  }
  const geom::SpatialIndex index(cloud.points);
  for (const auto& v : data.views) {
    const auto o = render_region_overlay(l, v, index);
    for (int r = 0; r < v.height(); ++r)
      for (int c = 0; c < v.width(); ++c) {
        if (!v.fg_mask.at(r, c)) continue;
        const auto q = geom::unproject_pixel(v, r, c, v.depth.at(r, c));
        std::size_t best = 0;
        for (std::size_t i = 1; i < cloud.size(); ++i)
          if ((cloud.points[i] - q).squaredNorm() < (cloud.points[best] - q).squaredNorm()) best = i;
        EXPECT_EQ(o.pixel_labels.at(r, c), l.labels[best]);
        EXPECT_EQ(decode_overlay_slot(&o.image.at(r, c, 0), &v.rgb.at(r, c, 0)), l.labels[best] - 1);
      }
  }
}

TEST(Overlay, PaletteIsFixed) {
  EXPECT_EQ(region_color(1), (Color{31, 119, 180}));
  EXPECT_EQ(region_color(21), region_color(1));
  const std::uint8_t black[3] = {0, 0, 0};
  EXPECT_EQ(decode_overlay_slot(black, black), -1);
}
