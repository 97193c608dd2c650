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

#ifndef RBIG_DETECTORS_HPP_
#define RBIG_DETECTORS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rbig/common.hpp"
#include "rbig/model.hpp"
#include "rbig/numerics.hpp"
#include "rbig/rng.hpp"

namespace rbig {

// Every detector returns "higher = more anomalous" scores. Downstream
// evaluation only consumes the ordering, so scales are arbitrary.

// ---------------------------------------------------------------------------
// RX: squared Mahalanobis distance to the background mean.
// ---------------------------------------------------------------------------

struct RxModel {
  Vector mean;
  Matrix precision;  // inverse of the regularized covariance
  double reg_lambda = 0.0;
};

// reg_lambda scales a trace-relative ridge: cov + reg_lambda*trace/d * I.
inline RxModel fit_rx(const Matrix& X, double reg_lambda = 1e-6) {
  auto [mean, cov] = mean_and_covariance(X);
  const Index d = cov.rows();
  const double tr = cov.trace();
  if (!(tr > 0.0)) {
    throw UnfittableError("fit_rx: data has zero total variance");
  }
  Matrix reg = cov;
  if (reg_lambda > 0.0) {
    reg += (reg_lambda * tr / static_cast<double>(d)) *
           Matrix::Identity(d, d);
  }
  Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError(
        "fit_rx: covariance not positive definite even after regularization");
  }
  RxModel m;
  m.mean = std::move(mean);
  m.precision = llt.solve(Matrix::Identity(d, d));
  m.precision = ((m.precision + m.precision.transpose()) * 0.5).eval();
  m.reg_lambda = reg_lambda;
  return m;
}

inline Vector score_rx(const RxModel& model, const Matrix& X) {
  if (X.cols() != model.mean.size()) {
    throw DimensionMismatchError("score_rx: expected " +
                                 std::to_string(model.mean.size()) +
                                 " columns, got " + std::to_string(X.cols()));
  }
  check_finite(X, "score_rx");
  Matrix centered = X.rowwise() - model.mean.transpose();
  return ((centered * model.precision).cwiseProduct(centered))
      .rowwise()
      .sum();
}

// ---------------------------------------------------------------------------
// Kernel detectors. Both share the RBF kernel k(a,b) = exp(-|a-b|^2/(2s^2))
// and a lengthscale chosen from pairwise distances of the (possibly
// subsampled) background.
// ---------------------------------------------------------------------------

enum class KernelKind { kKrx, kKde };
enum class SigmaRule { kMedian, kMean };

struct KernelConfig {
  SigmaRule sigma_rule = SigmaRule::kMedian;
  int max_support = 2000;  // cap on stored background rows (cubic solve cost)
  double reg_lambda = 1e-3;  // scaled by trace(K_centered)/n at fit time
  std::uint64_t seed = 0;
};

struct KernelModel {
  KernelKind kind = KernelKind::kKde;
  Matrix support;
  double sigma = 0.0;       // kernel lengthscale (KDE: already includes the
                            // 1/sqrt(d) bandwidth correction)
  double reg_effective = 0.0;  // KRX: the additive ridge actually applied
  SigmaRule sigma_rule = SigmaRule::kMedian;
  // KRX-only derived quantities, rebuilt after deserialization.
  Vector kbar;              // mean kernel vector of the support
  double kgrand = 0.0;      // grand mean of the kernel matrix
  Eigen::LLT<Matrix> factor;  // factorization of K_centered + reg*I
};

namespace detail {

// Uniform subsample of row indices without replacement (partial
// Fisher-Yates); preserves determinism for a given seed. Returns all rows in
// order when l <= cap.
inline std::vector<Index> subsample_rows(Index l, Index cap, RngState& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(l));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (l <= cap) return idx;
  for (Index i = 0; i < cap; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        rng.next_index(static_cast<std::size_t>(l - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(cap));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Matrix rbf_kernel(const Matrix& A, const Matrix& B, double sigma) {
  Vector a2 = A.rowwise().squaredNorm();
  Vector b2 = B.rowwise().squaredNorm();
  Matrix D = (-2.0 * A * B.transpose());
  D.colwise() += a2;
  D.rowwise() += b2.transpose();
  return (-D / (2.0 * sigma * sigma)).array().exp().matrix();
}

inline void build_krx_factor(KernelModel& m) {
  const Index n = m.support.rows();
  Matrix K = rbf_kernel(m.support, m.support, m.sigma);
  m.kbar = K.rowwise().mean();
  m.kgrand = m.kbar.mean();
  // Double centering: the Gram matrix of mean-centered feature maps.
  Matrix Kc = K;
  Kc.colwise() -= m.kbar;
  Kc.rowwise() -= m.kbar.transpose();
  Kc.array() += m.kgrand;
  Kc = ((Kc + Kc.transpose()) * 0.5).eval();
  Matrix reg = Kc + m.reg_effective * Matrix::Identity(n, n);
  m.factor.compute(reg);
  if (m.factor.info() != Eigen::Success) {
    throw NotPositiveDefiniteError(
        "fit_kernel: centered kernel matrix not positive definite after "
        "regularization");
  }
}

}  // namespace detail

inline KernelModel fit_kernel(const Matrix& X, KernelKind kind,
                              const KernelConfig& config = {}) {
  const Index l = X.rows();
  const Index d = X.cols();
  if (l < 2) {
    throw InsufficientSamplesError("fit_kernel: need at least 2 samples");
  }
  if (config.max_support < 2) {
    throw InvalidArgumentError("fit_kernel: max_support must be >= 2");
  }
  check_finite(X, "fit_kernel");

  RngState rng(config.seed);
  std::vector<Index> rows = detail::subsample_rows(
      l, static_cast<Index>(config.max_support), rng);
  const Index n = static_cast<Index>(rows.size());
  Matrix support(n, d);
  for (Index i = 0; i < n; ++i) {
    support.row(i) = X.row(rows[static_cast<std::size_t>(i)]);
  }

  // Pairwise Euclidean distances over the stored support.
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      dists.push_back((support.row(i) - support.row(j)).norm());
    }
  }
  double stat;
  if (config.sigma_rule == SigmaRule::kMedian) {
    std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    stat = dists[mid];
  } else {
    stat = std::accumulate(dists.begin(), dists.end(), 0.0) /
           static_cast<double>(dists.size());
  }
  if (!(stat > 0.0)) {
    throw DegenerateColumnError(
        "fit_kernel: pairwise-distance statistic is zero (all support points "
        "identical)");
  }

  KernelModel m;
  m.kind = kind;
  m.support = std::move(support);
  m.sigma_rule = config.sigma_rule;
  if (kind == KernelKind::kKde) {
    // Scott-flavored correction keeps the per-dimension bandwidth sane as d
    // grows.
    m.sigma = stat / std::sqrt(static_cast<double>(d));
  } else {
    m.sigma = stat;
    // The ridge scales with trace of the *centered* kernel, so compute that
    // first: trace(Kc) = trace(K) - 2*sum(rowmean) + n*grand.
    Matrix K = detail::rbf_kernel(m.support, m.support, m.sigma);
    Vector rowmean = K.rowwise().mean();
    const double grand = rowmean.mean();
    const double trace_c =
        K.trace() - 2.0 * rowmean.sum() + static_cast<double>(n) * grand;
    m.reg_effective = config.reg_lambda * trace_c / static_cast<double>(n);
    detail::build_krx_factor(m);
  }
  return m;
}

inline Vector score_krx(const KernelModel& model, const Matrix& X) {
  if (model.kind != KernelKind::kKrx) {
    throw InvalidArgumentError("score_krx: model is not a KRX model");
  }
  if (X.cols() != model.support.cols()) {
    throw DimensionMismatchError("score_krx: expected " +
                                 std::to_string(model.support.cols()) +
                                 " columns, got " + std::to_string(X.cols()));
  }
  check_finite(X, "score_krx");
  const Index n = X.rows();
  Vector out(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo,
                                                std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      Vector kx = detail::rbf_kernel(
                      X.row(static_cast<Index>(r)), model.support, model.sigma)
                      .transpose();
      Vector diff = kx - model.kbar;
      double s = diff.dot(model.factor.solve(diff));
      out[static_cast<Index>(r)] = std::max(0.0, s);  // clip tiny negatives
    }
  });
  return out;
}

// Negative log of the Gaussian-kernel density average, via log-sum-exp.
inline Vector score_kde(const KernelModel& model, const Matrix& X) {
  if (model.kind != KernelKind::kKde) {
    throw InvalidArgumentError("score_kde: model is not a KDE model");
  }
  if (X.cols() != model.support.cols()) {
    throw DimensionMismatchError("score_kde: expected " +
                                 std::to_string(model.support.cols()) +
                                 " columns, got " + std::to_string(X.cols()));
  }
  check_finite(X, "score_kde");
  const Index n = X.rows();
  const Index m = model.support.rows();
  const double d = static_cast<double>(model.support.cols());
  const double inv_two_s2 = 1.0 / (2.0 * model.sigma * model.sigma);
  const double log_norm =
      std::log(static_cast<double>(m)) +
      0.5 * d * (kLogTwoPi + 2.0 * std::log(model.sigma));
  Vector out(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo,
                                                std::size_t hi) {
    Vector expo(m);
    for (std::size_t r = lo; r < hi; ++r) {
      for (Index i = 0; i < m; ++i) {
        expo[i] = -(X.row(static_cast<Index>(r)) - model.support.row(i))
                       .squaredNorm() *
                  inv_two_s2;
      }
      const double mx = expo.maxCoeff();
      const double lse = mx + std::log((expo.array() - mx).exp().sum());
      out[static_cast<Index>(r)] = log_norm - lse;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Density-model score and the RX-prefiltered hybrid.
// ---------------------------------------------------------------------------

inline Vector score_rbig(const GaussianizationModel& model, const Matrix& X) {
  return -model.log_density(X).log_p;
}

struct HybridConfig {
  double retain_fraction = 0.95;  // fraction of lowest-RX rows kept
  RbigConfig rbig;
  double rx_reg_lambda = 1e-6;
};

struct HybridModel {
  RxModel rx;                    // stage 1, used only to select the
                                 // background subset
  GaussianizationModel density;  // stage 2, fitted on the retained rows
  double retain_fraction = 0.95;
  std::vector<Index> retained;   // row indices kept at fit time (ascending)
};

// RX prefilter discards the highest-scoring fraction (the rows most likely
// anomalous under the Gaussian assumption), then fits the density model on
// what remains. Hybrid scores are the stage-2 density scores.
inline HybridModel fit_hybrid(const Matrix& X, const HybridConfig& config) {
  const Index l = X.rows();
  const Index d = X.cols();
  const double rho = config.retain_fraction;
  if (!(rho >= 0.5 && rho < 1.0)) {
    throw InvalidArgumentError(
        "fit_hybrid: retain_fraction must lie in [0.5, 1)");
  }
  HybridModel m;
  m.rx = fit_rx(X, config.rx_reg_lambda);
  Vector s = score_rx(m.rx, X);

  std::vector<Index> order(static_cast<std::size_t>(l));
  std::iota(order.begin(), order.end(), Index{0});
  // Ascending by score; stable so ties resolve by row index.
  std::stable_sort(order.begin(), order.end(),
                   [&s](Index a, Index b) { return s[a] < s[b]; });
  const Index keep = static_cast<Index>(
      std::floor(rho * static_cast<double>(l) + 1e-9));
  if (keep < 10 * d || keep < 10) {
    throw InsufficientSamplesError(
        "fit_hybrid: only " + std::to_string(keep) +
        " rows retained; need at least " +
        std::to_string(std::max<Index>(10, 10 * d)));
  }
  order.resize(static_cast<std::size_t>(keep));
  std::sort(order.begin(), order.end());
  Matrix retained(keep, d);
  for (Index i = 0; i < keep; ++i) {
    retained.row(i) = X.row(order[static_cast<std::size_t>(i)]);
  }
  m.density = GaussianizationModel::fit(retained, config.rbig);
  m.retain_fraction = rho;
  m.retained = std::move(order);
  return m;
}

inline Vector score_hybrid(const HybridModel& model, const Matrix& X) {
  return score_rbig(model.density, X);
}

// ---------------------------------------------------------------------------
// Uniform dispatch, shared by anomaly and change scoring.
// ---------------------------------------------------------------------------

using DetectorModel =
    std::variant<RxModel, KernelModel, GaussianizationModel, HybridModel>;

inline Vector score_detector(const DetectorModel& model, const Matrix& X) {
  return std::visit(
      [&X](const auto& m) -> Vector {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RxModel>) {
          return score_rx(m, X);
        } else if constexpr (std::is_same_v<T, KernelModel>) {
          return m.kind == KernelKind::kKrx ? score_krx(m, X)
                                            : score_kde(m, X);
        } else if constexpr (std::is_same_v<T, GaussianizationModel>) {
          return score_rbig(m, X);
        } else {
          return score_hybrid(m, X);
        }
      },
      model);
}

// Change detection: the model was fitted on the first image's pixels; the
// second image's pixels are scored by their improbability under it. Exactly
// the anomaly-scoring machinery applied to the new rows.
inline Vector score_change(const DetectorModel& model_on_before,
                           const Matrix& after) {
  return score_detector(model_on_before, after);
}

}  // namespace rbig

#endif  // RBIG_DETECTORS_HPP_
