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

#ifndef RBIG_TOY_HPP_
#define RBIG_TOY_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "rbig/common.hpp"
#include "rbig/raster.hpp"
#include "rbig/rng.hpp"

namespace rbig {

struct ToyData {
  Matrix X;
  std::vector<int> labels;  // 1 = anomaly
};

// 2-D ring: background on a circle of radius 1 with radial noise 0.05,
// anomalies as a tight Gaussian blob at the center. The anomaly count is
// exact: round(n * anomaly_rate). Background rows come first, then
// anomalies.
inline ToyData make_ring(Index n, double anomaly_rate, RngState& rng) {
  if (n < 1) throw InvalidArgumentError("make_ring: n must be >= 1");
  if (!(anomaly_rate >= 0.0 && anomaly_rate < 1.0)) {
    throw InvalidArgumentError("make_ring: anomaly_rate must lie in [0, 1)");
  }
  const Index n_pos = static_cast<Index>(
      std::llround(anomaly_rate * static_cast<double>(n)));
  const Index n_bg = n - n_pos;
  ToyData out;
  out.X.resize(n, 2);
  out.labels.assign(static_cast<std::size_t>(n), 0);
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (Index i = 0; i < n_bg; ++i) {
    const double theta = kTwoPi * rng.uniform01();
    const double r = 1.0 + 0.05 * rng.normal();
    out.X(i, 0) = r * std::cos(theta);
    out.X(i, 1) = r * std::sin(theta);
  }
  for (Index i = n_bg; i < n; ++i) {
    out.X(i, 0) = 0.1 * rng.normal();
    out.X(i, 1) = 0.1 * rng.normal();
    out.labels[static_cast<std::size_t>(i)] = 1;
  }
  return out;
}

// 2-D correlated Gaussian, N(0, [[1, 0.6], [0.6, 1]]); no anomalies.
inline ToyData make_gaussian(Index n, RngState& rng) {
  if (n < 1) throw InvalidArgumentError("make_gaussian: n must be >= 1");
  ToyData out;
  out.X.resize(n, 2);
  out.labels.assign(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    const double z0 = rng.normal();
    const double z1 = rng.normal();
    out.X(i, 0) = z0;
    out.X(i, 1) = 0.6 * z0 + 0.8 * z1;  // Cholesky factor of the covariance
  }
  return out;
}

// 2-D two-component Gaussian mixture (modes at (-2, 0) and (2, 0), equal
// weights, isotropic 0.5 noise); a multimodal density-fitting exercise,
// no anomalies.
inline ToyData make_mixture(Index n, RngState& rng) {
  if (n < 1) throw InvalidArgumentError("make_mixture: n must be >= 1");
  ToyData out;
  out.X.resize(n, 2);
  out.labels.assign(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    const double center = rng.uniform01() < 0.5 ? -2.0 : 2.0;
    out.X(i, 0) = center + 0.5 * rng.normal();
    out.X(i, 1) = 0.5 * rng.normal();
  }
  return out;
}

struct CdPair {
  RasterImage before;
  RasterImage after;
  RasterImage mask;  // single band, 1 = changed pixel
};

// Synthetic change-detection pair. Background pixels are per-band bimodal:
// a random mode at -1 or +1 plus 0.2 noise, independently per band. The
// after image redraws the background (same distribution, so resampling
// alone should not trigger detections) and replaces a square patch of
// roughly changed_fraction of the pixels with draws from the inter-mode
// valley, N(0, 0.2^2), in every band. The shift keeps per-band means and
// stays well inside the background's covariance, which defeats
// Mahalanobis-style detectors, while the marginal density at the valley is
// tiny, so density-based detectors see it immediately.
inline CdPair make_cd_pair(std::uint32_t width, std::uint32_t height,
                           std::uint32_t bands, double changed_fraction,
                           RngState& rng) {
  if (width < 8 || height < 8 || bands < 1) {
    throw InvalidArgumentError(
        "make_cd_pair: need width, height >= 8 and bands >= 1");
  }
  if (!(changed_fraction > 0.0 && changed_fraction < 0.5)) {
    throw InvalidArgumentError(
        "make_cd_pair: changed_fraction must lie in (0, 0.5)");
  }
  const std::size_t npx = static_cast<std::size_t>(width) * height;
  std::uint32_t side = static_cast<std::uint32_t>(std::llround(
      std::sqrt(changed_fraction * static_cast<double>(npx))));
  side = std::max(1u, std::min({side, width - 2, height - 2}));
  const std::uint32_t row0 = height / 8;
  const std::uint32_t col0 = width / 8;

  CdPair out;
  for (RasterImage* img : {&out.before, &out.after}) {
    img->width = width;
    img->height = height;
    img->bands = bands;
    img->values.resize(npx * bands);
  }
  out.mask.width = width;
  out.mask.height = height;
  out.mask.bands = 1;
  out.mask.values.assign(npx, 0.0);

  auto in_patch = [&](std::uint32_t r, std::uint32_t c) {
    return r >= row0 && r < row0 + side && c >= col0 && c < col0 + side;
  };

  // Pixel-major draw order (row, col, then band) so the stream is a pure
  // function of the geometry and seed.
  for (std::uint32_t r = 0; r < height; ++r) {
    for (std::uint32_t c = 0; c < width; ++c) {
      for (std::uint32_t b = 0; b < bands; ++b) {
        const double mode = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        out.before.at(b, r, c) = mode + 0.2 * rng.normal();
      }
    }
  }
  for (std::uint32_t r = 0; r < height; ++r) {
    for (std::uint32_t c = 0; c < width; ++c) {
      const bool changed = in_patch(r, c);
      for (std::uint32_t b = 0; b < bands; ++b) {
        if (changed) {
          out.after.at(b, r, c) = 0.2 * rng.normal();
        } else {
          const double mode = rng.uniform01() < 0.5 ? -1.0 : 1.0;
          out.after.at(b, r, c) = mode + 0.2 * rng.normal();
        }
      }
      if (changed) out.mask.at(0, r, c) = 1.0;
    }
  }
  return out;
}

}  // namespace rbig

#endif  // RBIG_TOY_HPP_
