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

#ifndef RBIG_MARGINAL_HPP_
#define RBIG_MARGINAL_HPP_

#include <algorithm>
#include <cmath>
#include <string>

#include "rbig/common.hpp"
#include "rbig/numerics.hpp"

namespace rbig {

// Histogram bin count heuristic: sqrt(l) clamped to a sane range.
inline int default_bin_count(Index l) {
  int b = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(l))));
  return std::clamp(b, 16, 1024);
}

// Monotone map sending one dimension's empirical distribution to the
// standard normal.
//
// The estimator is a floored histogram over the training range extended by
// 10% on each side. Densities are floored at eps_pdf = 1e-10/range so
// log-derivatives stay finite everywhere, and the CDF is squeezed into
// [eps_cdf, 1 - eps_cdf] with eps_cdf = 1/(4l) so the normal quantile
// function stays finite. Inputs outside the extended support are clamped
// onto it; for anomaly scoring that is the desired behaviour, since such
// points land on floored-density bins and receive extreme scores.
class MarginalMap {
 public:
  struct Eval {
    double y;
    double log_deriv;  // ln f(x) - ln phi(y), the Jacobian contribution
  };

  static MarginalMap fit(const Eigen::Ref<const Vector>& column, int bins) {
    const Index l = column.size();
    if (l < 10) {
      throw InsufficientSamplesError(
          "MarginalMap::fit: need at least 10 samples, got " +
          std::to_string(l));
    }
    if (bins < 2) {
      throw InvalidArgumentError("MarginalMap::fit: bins must be >= 2");
    }
    check_finite(column, "MarginalMap::fit");

    const double mn = column.minCoeff();
    const double mx = column.maxCoeff();
    const double range = mx - mn;
    if (!(range > 0.0)) {
      throw DegenerateColumnError(
          "MarginalMap::fit: column is constant (zero range)");
    }

    MarginalMap m;
    const int B = bins;
    const double lo = mn - 0.1 * range;
    const double hi = mx + 0.1 * range;
    const double w = (hi - lo) / B;
    m.edges_.resize(B + 1);
    for (int k = 0; k <= B; ++k) m.edges_[k] = lo + k * w;
    m.edges_[B] = hi;  // guard against accumulation drift at the top edge
    m.support_lo_ = m.edges_[0];
    m.support_hi_ = m.edges_[B];

    m.densities_ = Vector::Zero(B);
    for (Index i = 0; i < l; ++i) {
      int k = static_cast<int>((column[i] - lo) / w);
      k = std::clamp(k, 0, B - 1);
      m.densities_[k] += 1.0;
    }
    const double eps_pdf = 1e-10 / range;
    const double eps_cdf = 1.0 / (4.0 * static_cast<double>(l));
    m.densities_ /= static_cast<double>(l) * w;       // raw density estimate
    m.densities_ = m.densities_.cwiseMax(eps_pdf);    // floor empty bins
    m.densities_ /= m.densities_.sum() * w;           // back to unit mass
    m.densities_ *= 1.0 - 2.0 * eps_cdf;              // squeeze for CDF clamp
    m.densities_ = m.densities_.cwiseMax(eps_pdf);    // re-floor after squeeze

    // CDF at edges: starts at eps_cdf and integrates the floored density, so
    // it is strictly increasing and ends within a hair of 1 - eps_cdf.
    m.cdf_.resize(B + 1);
    m.cdf_[0] = eps_cdf;
    for (int k = 0; k < B; ++k) m.cdf_[k + 1] = m.cdf_[k] + m.densities_[k] * w;
    return m;
  }

  Eval forward(double x) const {
    const int B = static_cast<int>(densities_.size());
    x = std::clamp(x, support_lo_, support_hi_);
    const double* begin = edges_.data();
    const double* end = begin + B + 1;
    int k = static_cast<int>(std::upper_bound(begin, end, x) - begin) - 1;
    k = std::clamp(k, 0, B - 1);
    double p = cdf_[k] + densities_[k] * (x - edges_[k]);
    p = std::clamp(p, cdf_[0], cdf_[B]);
    const double y = inverse_normal_cdf(p);
    // ln f(x) - ln phi(y) with phi the standard normal pdf.
    const double log_deriv =
        std::log(densities_[k]) + 0.5 * kLogTwoPi + 0.5 * y * y;
    return {y, log_deriv};
  }

  double inverse(double y) const {
    const int B = static_cast<int>(densities_.size());
    double p = standard_normal_cdf(y);
    p = std::clamp(p, cdf_[0], cdf_[B]);
    const double* begin = cdf_.data();
    const double* end = begin + B + 1;
    int k = static_cast<int>(std::upper_bound(begin, end, p) - begin) - 1;
    k = std::clamp(k, 0, B - 1);
    double x = edges_[k] + (p - cdf_[k]) / densities_[k];
    return std::clamp(x, edges_[k], edges_[k + 1]);
  }

  // The x with F(x) = 0.5 (maps to y = 0).
  double median() const { return inverse(0.0); }

  const Vector& bin_edges() const { return edges_; }
  const Vector& bin_densities() const { return densities_; }
  const Vector& cdf_at_edges() const { return cdf_; }
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }

  // Serialization support: rebuild from stored fields.
  static MarginalMap from_parts(Vector edges, Vector densities, Vector cdf,
                                double support_lo, double support_hi) {
    if (edges.size() != densities.size() + 1 || cdf.size() != edges.size()) {
      throw ParseError("MarginalMap::from_parts: inconsistent field sizes");
    }
    MarginalMap m;
    m.edges_ = std::move(edges);
    m.densities_ = std::move(densities);
    m.cdf_ = std::move(cdf);
    m.support_lo_ = support_lo;
    m.support_hi_ = support_hi;
    return m;
  }

 private:
  MarginalMap() = default;

  Vector edges_;      // B + 1, strictly increasing, uniform width
  Vector densities_;  // B, floored piecewise-constant density
  Vector cdf_;        // B + 1, strictly increasing inside [eps, 1 - eps]
  double support_lo_ = 0.0;
  double support_hi_ = 0.0;
};

// Free-function spelling used by the fitting pipeline.
inline MarginalMap fit_marginal(const Eigen::Ref<const Vector>& column,
                                int bins) {
  return MarginalMap::fit(column, bins);
}

}  // namespace rbig

#endif  // RBIG_MARGINAL_HPP_
