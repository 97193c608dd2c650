// Copyright 2026 The rbig Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "rbig/model.hpp"
#include "rbig/rng.hpp"
#include "rbig/toy.hpp"
#include "testing_util.hpp"

namespace {

using rbig::GaussianizationModel;
using rbig::Index;
using rbig::Matrix;
using rbig::RbigConfig;
using rbig::Vector;

Matrix standard_normal_matrix(Index rows, Index cols, std::uint64_t seed) {
  rbig::RngState rng(seed);
  Matrix X(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) X(i, j) = rng.normal();
  }
  return X;
}

TEST(ModelFit, AlreadyGaussianGivesNearIdentityMaps) {
  Matrix X = standard_normal_matrix(10000, 2, 3);
  RbigConfig cfg;
  cfg.max_layers = 10;
  auto m = GaussianizationModel::fit(X, cfg);
  // The stopping rule should fire immediately on Gaussian input.
  EXPECT_LE(m.layers().size(), 2u);
  auto [Y, log_det] = m.transform(X);
  EXPECT_LT(log_det.cwiseAbs().mean(), 0.1);
  // The single layer's maps are near identity over the bulk of the data.
  for (double x : {-1.5, -0.5, 0.0, 0.5, 1.5}) {
    EXPECT_NEAR(m.layers()[0].marginals[0].forward(x).y, x, 0.12) << x;
  }
}

TEST(ModelFit, RingBecomesGaussianAfterManyLayers) {
  rbig::RngState rng(19);
  rbig::ToyData ring = rbig::make_ring(10000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 100;
  cfg.tol_negentropy = 0.0;  // the trace is noisy on the ring; run them all
  auto m = GaussianizationModel::fit(ring.X, cfg);
  EXPECT_EQ(m.layers().size(), 100u);
  auto [Y, log_det] = m.transform(ring.X);
  for (Index j = 0; j < 2; ++j) {
    EXPECT_LT(std::abs(testutil::skewness(Y.col(j))), 0.1) << "dim " << j;
    EXPECT_LT(std::abs(testutil::excess_kurtosis(Y.col(j))), 0.3)
        << "dim " << j;
  }
  EXPECT_LT(std::abs(testutil::pearson(Y.col(0), Y.col(1))), 0.05);
}

TEST(ModelFit, OneDimensionalRotationsAreIdentity) {
  Matrix X = standard_normal_matrix(500, 1, 5);
  RbigConfig cfg;
  cfg.max_layers = 3;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(X, cfg);
  ASSERT_EQ(m.layers().size(), 3u);
  for (const auto& layer : m.layers()) {
    ASSERT_EQ(layer.rotation.rows(), 1);
    EXPECT_DOUBLE_EQ(layer.rotation(0, 0), 1.0);
  }
}

TEST(ModelFit, ConstantColumnDroppedAndRestored) {
  Matrix X = standard_normal_matrix(2000, 3, 7);
  X.col(1).setConstant(-3.25);
  auto m = GaussianizationModel::fit(X, RbigConfig{});
  ASSERT_EQ(m.dropped_bands().size(), 1u);
  EXPECT_EQ(m.dropped_bands()[0], 1);
  EXPECT_DOUBLE_EQ(m.dropped_values()[0], -3.25);
  EXPECT_EQ(m.input_dim(), 3);
  EXPECT_EQ(m.dim(), 2);

  auto [Y, log_det] = m.transform(X);
  EXPECT_EQ(Y.cols(), 2);
  Matrix back = m.inverse_transform(Y);
  ASSERT_EQ(back.cols(), 3);
  for (Index i = 0; i < back.rows(); ++i) {
    EXPECT_DOUBLE_EQ(back(i, 1), -3.25);
  }
}

TEST(ModelFit, AllConstantColumnsUnfittable) {
  Matrix X = Matrix::Ones(100, 2);
  EXPECT_THROW(GaussianizationModel::fit(X, RbigConfig{}),
               rbig::UnfittableError);
}

TEST(ModelFit, InputValidation) {
  Matrix ok = standard_normal_matrix(100, 2, 1);
  RbigConfig bad_layers;
  bad_layers.max_layers = 0;
  EXPECT_THROW(GaussianizationModel::fit(ok, bad_layers),
               rbig::InvalidArgumentError);

  Matrix tiny = standard_normal_matrix(5, 2, 1);
  EXPECT_THROW(GaussianizationModel::fit(tiny, RbigConfig{}),
               rbig::InsufficientSamplesError);

  Matrix with_nan = ok;
  with_nan(3, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(GaussianizationModel::fit(with_nan, RbigConfig{}),
               rbig::InvalidArgumentError);
}

TEST(ModelFit, FewSamplesPerDimensionWarns) {
  Matrix X = standard_normal_matrix(25, 4, 11);
  auto m = GaussianizationModel::fit(X, RbigConfig{});
  EXPECT_FALSE(m.warnings().empty());
}

TEST(ModelTransform, TrainingOutputIsCentered) {
  rbig::RngState rng(23);
  rbig::ToyData ring = rbig::make_ring(5000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 30;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  auto [Y, log_det] = m.transform(ring.X);
  for (Index j = 0; j < Y.cols(); ++j) {
    EXPECT_NEAR(Y.col(j).mean(), 0.0, 0.05) << "dim " << j;
  }
}

TEST(ModelTransform, BatchEqualsSingleRowExactly) {
  rbig::RngState rng(29);
  rbig::ToyData ring = rbig::make_ring(1000, 0.01, rng);
  RbigConfig cfg;
  cfg.max_layers = 15;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  auto [Y, log_det] = m.transform(ring.X);
  for (Index i : {Index{0}, Index{17}, Index{999}}) {
    auto [yi, ldi] = m.transform(ring.X.row(i));
    ASSERT_EQ(yi.rows(), 1);
    EXPECT_EQ(yi(0, 0), Y(i, 0));
    EXPECT_EQ(yi(0, 1), Y(i, 1));
    EXPECT_EQ(ldi[0], log_det[i]);
  }
}

TEST(ModelTransform, WrongWidthRejected) {
  Matrix X = standard_normal_matrix(200, 2, 31);
  auto m = GaussianizationModel::fit(X, RbigConfig{});
  Matrix wide = standard_normal_matrix(5, 3, 1);
  EXPECT_THROW(m.transform(wide), rbig::DimensionMismatchError);
  EXPECT_THROW(m.log_density(wide), rbig::DimensionMismatchError);
}

TEST(ModelTransform, RotationChoiceLeavesLogDetUnchanged) {
  // The marginal maps of the first layer are fitted before any rotation is
  // applied, so a one-layer model must produce the same log-determinant no
  // matter which rotation family follows the maps: rotations are
  // volume-preserving.
  rbig::RngState rng(37);
  rbig::ToyData ring = rbig::make_ring(2000, 0.0, rng);
  RbigConfig pca;
  pca.max_layers = 1;
  pca.tol_negentropy = 0.0;
  RbigConfig random = pca;
  random.rotation = rbig::RotationKind::kRandom;
  random.seed = 99;
  auto m_pca = GaussianizationModel::fit(ring.X, pca);
  auto m_rand = GaussianizationModel::fit(ring.X, random);
  auto [Yp, ldp] = m_pca.transform(ring.X);
  auto [Yr, ldr] = m_rand.transform(ring.X);
  ASSERT_EQ(ldp.size(), ldr.size());
  for (Index i = 0; i < ldp.size(); ++i) {
    EXPECT_EQ(ldp[i], ldr[i]) << "row " << i;
  }
}

TEST(ModelInverse, RoundTripOnTrainingPoints) {
  rbig::RngState rng(41);
  rbig::ToyData ring = rbig::make_ring(4000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 50;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  Matrix probe = ring.X.topRows(1000);
  auto [Y, log_det] = m.transform(probe);
  Matrix back = m.inverse_transform(Y);
  for (Index j = 0; j < 2; ++j) {
    const double range =
        ring.X.col(j).maxCoeff() - ring.X.col(j).minCoeff();
    EXPECT_LT((back.col(j) - probe.col(j)).cwiseAbs().maxCoeff(),
              1e-4 * range)
        << "dim " << j;
  }
}

TEST(ModelInverse, OriginMapsInsideSupport) {
  rbig::RngState rng(43);
  rbig::ToyData ring = rbig::make_ring(2000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 20;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  Matrix x = m.inverse_transform(Matrix::Zero(1, 2));
  for (Index j = 0; j < 2; ++j) {
    ASSERT_TRUE(std::isfinite(x(0, j)));
    const double mn = ring.X.col(j).minCoeff();
    const double mx = ring.X.col(j).maxCoeff();
    const double pad = 0.1 * (mx - mn);
    EXPECT_GE(x(0, j), mn - pad);
    EXPECT_LE(x(0, j), mx + pad);
  }
}

TEST(ModelSample, SynthesizedRingMatchesTrainingRadii) {
  rbig::RngState rng(47);
  rbig::ToyData ring = rbig::make_ring(5000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 50;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  rbig::RngState sample_rng(1);
  Matrix S = m.sample(2000, sample_rng);
  std::vector<double> train_r, sample_r;
  for (Index i = 0; i < ring.X.rows(); ++i) {
    train_r.push_back(ring.X.row(i).norm());
  }
  for (Index i = 0; i < S.rows(); ++i) sample_r.push_back(S.row(i).norm());
  EXPECT_LT(testutil::ks_statistic(train_r, sample_r), 0.1);
}

TEST(ModelSample, EmptyAndReproducible) {
  Matrix X = standard_normal_matrix(500, 2, 53);
  auto m = GaussianizationModel::fit(X, RbigConfig{});
  rbig::RngState r0(9);
  EXPECT_EQ(m.sample(0, r0).rows(), 0);
  EXPECT_EQ(m.sample(0, r0).cols(), 2);
  rbig::RngState r1(9), r2(9);
  Matrix a = m.sample(50, r1);
  Matrix b = m.sample(50, r2);
  EXPECT_EQ(a, b);
}

TEST(ModelSample, StaysInsideExtendedSupportBox) {
  rbig::RngState rng(59);
  rbig::ToyData ring = rbig::make_ring(3000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 25;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  rbig::RngState sample_rng(2);
  Matrix S = m.sample(5000, sample_rng);
  for (Index j = 0; j < 2; ++j) {
    const double mn = ring.X.col(j).minCoeff();
    const double mx = ring.X.col(j).maxCoeff();
    const double pad = 0.1 * (mx - mn);
    EXPECT_GE(S.col(j).minCoeff(), mn - pad - 1e-12);
    EXPECT_LE(S.col(j).maxCoeff(), mx + pad + 1e-12);
  }
}

TEST(ModelLogDensity, OneDimensionalNormalAtZero) {
  Matrix X = standard_normal_matrix(100000, 1, 61);
  auto m = GaussianizationModel::fit(X, RbigConfig{});
  auto ld = m.log_density(Matrix::Zero(1, 1));
  EXPECT_NEAR(ld.log_p[0], -0.9189385332046727, 0.1);
}

TEST(ModelLogDensity, TwoDimensionalGridIntegralNearOne) {
  Matrix X = standard_normal_matrix(20000, 2, 67);
  auto m = GaussianizationModel::fit(X, RbigConfig{});
  const int g = 200;
  const double lo = -5.0, hi = 5.0;
  const double w = (hi - lo) / (g - 1);
  Matrix grid(g * g, 2);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      grid(i * g + j, 0) = lo + i * w;
      grid(i * g + j, 1) = lo + j * w;
    }
  }
  auto ld = m.log_density(grid);
  double integral = 0.0;
  for (Index i = 0; i < ld.log_p.size(); ++i) integral += std::exp(ld.log_p[i]);
  integral *= w * w;
  EXPECT_NEAR(integral, 1.0, 0.05);
}

TEST(ModelLogDensity, FarPointFiniteAndBelowTrainingMedian) {
  rbig::RngState rng(71);
  rbig::ToyData ring = rbig::make_ring(2000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 20;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  auto train = m.log_density(ring.X);
  std::vector<double> lp(train.log_p.data(),
                         train.log_p.data() + train.log_p.size());
  std::nth_element(lp.begin(), lp.begin() + lp.size() / 2, lp.end());
  const double median = lp[lp.size() / 2];

  const double range = ring.X.col(0).maxCoeff() - ring.X.col(0).minCoeff();
  Matrix far(1, 2);
  far << 10.0 * range, 10.0 * range;
  auto out = m.log_density(far);
  ASSERT_TRUE(std::isfinite(out.log_p[0]));
  EXPECT_LT(out.log_p[0], median);
}

TEST(ModelLogDensity, DecomposesIntoGaussTermPlusLogDet) {
  rbig::RngState rng(73);
  rbig::ToyData ring = rbig::make_ring(1500, 0.01, rng);
  RbigConfig cfg;
  cfg.max_layers = 10;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  auto ld = m.log_density(ring.X);
  for (Index i = 0; i < ld.log_p.size(); ++i) {
    EXPECT_EQ(ld.log_p[i], ld.log_p_gauss[i] + ld.log_det_j[i]);
  }
}

TEST(ModelLogDensity, MatchesFiniteDifferenceJacobian) {
  rbig::RngState rng(79);
  rbig::ToyData ring = rbig::make_ring(4000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 20;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  auto [Yall, ldall] = m.transform(ring.X);

  const double r0 = ring.X.col(0).maxCoeff() - ring.X.col(0).minCoeff();
  const double r1 = ring.X.col(1).maxCoeff() - ring.X.col(1).minCoeff();
  const double h0 = 1e-6 * r0, h1 = 1e-6 * r1;
  auto fd_det = [&](const Eigen::RowVector2d& x, double a, double b) {
    Matrix pts(4, 2);
    for (int k = 0; k < 4; ++k) pts.row(k) = x;
    pts(0, 0) += a;
    pts(1, 0) -= a;
    pts(2, 1) += b;
    pts(3, 1) -= b;
    auto [Y, ld] = m.transform(pts);
    const double j00 = (Y(0, 0) - Y(1, 0)) / (2 * a);
    const double j10 = (Y(0, 1) - Y(1, 1)) / (2 * a);
    const double j01 = (Y(2, 0) - Y(3, 0)) / (2 * b);
    const double j11 = (Y(2, 1) - Y(3, 1)) / (2 * b);
    return std::abs(j00 * j11 - j01 * j10);
  };

  rbig::RngState pick(5);
  int accepted = 0, guard = 0;
  while (accepted < 30 && ++guard < 500) {
    const Index i = static_cast<Index>(pick.next_index(ring.X.rows()));
    const Eigen::RowVector2d x = ring.X.row(i);
    const double d1 = fd_det(x, h0, h1);
    const double d2 = fd_det(x, 0.5 * h0, 0.5 * h1);
    // The transform is piecewise linear; only points whose difference
    // stencil stays on one linear piece have a defined Jacobian. Halving
    // the step and getting the same answer is the admission test.
    if (std::abs(d1 - d2) > 0.01 * std::max(d1, d2)) continue;
    ++accepted;
    const double analytic = std::exp(ldall[i]);
    EXPECT_NEAR(d1 / analytic, 1.0, 0.10) << "row " << i;
  }
  EXPECT_EQ(accepted, 30);
}

TEST(NegentropyTrace, GaussianDataStopsAfterFirstLayer) {
  Matrix X = standard_normal_matrix(100000, 2, 83);
  auto m = GaussianizationModel::fit(X, RbigConfig{});
  ASSERT_TRUE(m.has_trace());
  ASSERT_EQ(m.negentropy_trace().size(), 1u);
  EXPECT_LT(m.negentropy_trace()[0], 1e-3 * 2);
  EXPECT_EQ(m.layers().size(), 1u);
}

TEST(NegentropyTrace, RingTraceDecreasesOverall) {
  rbig::RngState rng(89);
  rbig::ToyData ring = rbig::make_ring(5000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 30;
  cfg.tol_negentropy = 0.0;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  const auto& trace = m.negentropy_trace();
  ASSERT_EQ(trace.size(), 30u);
  EXPECT_LT(trace.back(), trace.front());
}

TEST(NegentropyTrace, SingleLayerGivesLengthOne) {
  rbig::RngState rng(97);
  rbig::ToyData ring = rbig::make_ring(1000, 0.0, rng);
  RbigConfig cfg;
  cfg.max_layers = 1;
  auto m = GaussianizationModel::fit(ring.X, cfg);
  EXPECT_EQ(m.negentropy_trace().size(), 1u);
}

TEST(NegentropyTrace, MissingTraceThrows) {
  Matrix X = standard_normal_matrix(500, 2, 101);
  auto fitted = GaussianizationModel::fit(X, RbigConfig{});
  auto rebuilt = GaussianizationModel::from_parts(
      fitted.input_dim(), fitted.layers(),
      fitted.dropped_bands(), fitted.dropped_values(), fitted.config(),
      fitted.bins_used(), {});
  EXPECT_FALSE(rebuilt.has_trace());
  EXPECT_THROW(rebuilt.negentropy_trace(), rbig::NotRecordedError);
}

TEST(ModelFit, SameConfigSameDataIsDeterministic) {
  rbig::RngState rng(103);
  rbig::ToyData ring = rbig::make_ring(2000, 0.01, rng);
  RbigConfig cfg;
  cfg.max_layers = 10;
  cfg.tol_negentropy = 0.0;
  cfg.rotation = rbig::RotationKind::kRandom;
  cfg.seed = 17;
  auto a = GaussianizationModel::fit(ring.X, cfg);
  auto b = GaussianizationModel::fit(ring.X, cfg);
  auto [Ya, la] = a.transform(ring.X);
  auto [Yb, lb] = b.transform(ring.X);
  EXPECT_EQ(Ya, Yb);
  EXPECT_EQ(la, lb);
}

}  // namespace
