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

#ifndef RBIG_MODEL_HPP_
#define RBIG_MODEL_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rbig/common.hpp"
#include "rbig/marginal.hpp"
#include "rbig/numerics.hpp"
#include "rbig/rng.hpp"

namespace rbig {

enum class RotationKind { kPca, kRandom };

struct RbigConfig {
  int max_layers = 100;
  int bins = 0;  // 0 = sqrt(l) heuristic (see default_bin_count)
  RotationKind rotation = RotationKind::kPca;
  // Early-stop threshold on the summed marginal negentropy, per dimension;
  // 0 disables early stopping.
  double tol_negentropy = 1e-3;
  std::uint64_t seed = 0;
};

// One iteration: d monotone marginal maps followed by an orthogonal rotation.
struct RbigLayer {
  std::vector<MarginalMap> marginals;
  Matrix rotation;  // y = rotation * psi(x), orthogonal
};

struct LogDensityResult {
  Vector log_p;        // log p_X(x), = log_p_gauss + log_det_j by construction
  Vector log_p_gauss;  // log density of the transformed point under N(0, I)
  Vector log_det_j;    // accumulated marginal log-derivatives
};

// Crude but consistent non-Gaussianity measure used for the stopping rule
// and convergence trace: Gaussian entropy at the matched variance minus the
// histogram entropy (Miller-Madow corrected), clamped at zero. Uses the same
// bin policy as the marginal fitter.
inline double marginal_negentropy(const Eigen::Ref<const Vector>& column,
                                  int bins) {
  const Index l = column.size();
  const double mn = column.minCoeff();
  const double mx = column.maxCoeff();
  const double range = mx - mn;
  if (!(range > 0.0) || l < 2) return 0.0;
  const double lo = mn - 0.1 * range;
  const double hi = mx + 0.1 * range;
  const double w = (hi - lo) / bins;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (Index i = 0; i < l; ++i) {
    int k = static_cast<int>((column[i] - lo) / w);
    k = std::clamp(k, 0, bins - 1);
    counts[static_cast<std::size_t>(k)] += 1.0;
  }
  double h_hist = 0.0;
  int occupied = 0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    ++occupied;
    const double p = c / static_cast<double>(l);
    h_hist -= p * std::log(p / w);
  }
  h_hist += static_cast<double>(occupied - 1) /
            (2.0 * static_cast<double>(l));  // Miller-Madow bias correction
  const double mean = column.mean();
  const double var =
      (column.array() - mean).square().sum() / static_cast<double>(l - 1);
  if (!(var > 0.0)) return 0.0;
  // 0.5 * ln(2*pi*e*var)
  const double h_gauss = 0.5 * std::log(17.079468445347134131 * var);
  return std::max(0.0, h_gauss - h_hist);
}

// The iterative Gaussianization density model: a stack of layers, each a set
// of per-dimension marginal Gaussianizations followed by a rotation. The
// forward transform sends the training distribution toward N(0, I); its
// accumulated log-det Jacobian (rotations contribute exactly zero) turns the
// Gaussian log-density back into a log-density in data space.
class GaussianizationModel {
 public:
  static GaussianizationModel fit(const Matrix& X, const RbigConfig& config) {
    const Index l = X.rows();
    const Index d_in = X.cols();
    if (d_in < 1) {
      throw InvalidArgumentError("fit: need at least one column");
    }
    if (l < 10) {
      throw InsufficientSamplesError("fit: need at least 10 samples, got " +
                                     std::to_string(l));
    }
    if (config.max_layers < 1) {
      throw InvalidArgumentError("fit: max_layers must be >= 1");
    }
    check_finite(X, "fit");

    GaussianizationModel m;
    m.input_dim_ = d_in;
    m.config_ = config;

    // Constant columns carry no density information and would break the
    // marginal fitter; drop them and remember their values so inverse
    // transforms can reinstate them.
    std::vector<Index> active;
    for (Index j = 0; j < d_in; ++j) {
      const double range = X.col(j).maxCoeff() - X.col(j).minCoeff();
      if (range > 0.0) {
        active.push_back(j);
      } else {
        m.dropped_bands_.push_back(j);
        m.dropped_values_.push_back(X(0, j));
      }
    }
    if (active.empty()) {
      throw UnfittableError("fit: every column is constant");
    }
    const Index d = static_cast<Index>(active.size());
    m.dim_ = d;
    if (l < 10 * d) {
      m.warnings_.push_back("fewer than 10*d samples (" + std::to_string(l) +
                            " for d=" + std::to_string(d) +
                            "); density estimates will be rough");
    }

    const int bins = config.bins > 0 ? config.bins : default_bin_count(l);
    m.bins_used_ = bins;

    Matrix Z(l, d);
    for (Index j = 0; j < d; ++j) Z.col(j) = X.col(active[j]);

    RngState rng(config.seed);
    for (int layer_idx = 0; layer_idx < config.max_layers; ++layer_idx) {
      RbigLayer layer;
      layer.marginals.reserve(static_cast<std::size_t>(d));
      for (Index j = 0; j < d; ++j) {
        MarginalMap map = [&]() -> MarginalMap {
          try {
            return MarginalMap::fit(Z.col(j), bins);
          } catch (const DegenerateColumnError&) {
            throw UnfittableError(
                "fit: dimension " + std::to_string(j) + " collapsed to a "
                "constant at layer " + std::to_string(layer_idx) +
                " (exactly dependent input columns?)");
          }
        }();
        for (Index i = 0; i < l; ++i) Z(i, j) = map.forward(Z(i, j)).y;
        layer.marginals.push_back(std::move(map));
      }

      if (d == 1) {
        layer.rotation = Matrix::Identity(1, 1);
      } else if (config.rotation == RotationKind::kPca) {
        auto [mu, cov] = mean_and_covariance(Z);
        (void)mu;
        EigResult eig = symmetric_eig(cov);
        // y = V^T z, i.e. project onto principal axes; row-major data makes
        // this Z * V.
        layer.rotation = eig.vectors.transpose();
        Z = (Z * eig.vectors).eval();
      } else {
        Matrix R = random_rotation(d, rng);
        layer.rotation = R;
        Z = (Z * R.transpose()).eval();
      }
      m.layers_.push_back(std::move(layer));

      double total = 0.0;
      for (Index j = 0; j < d; ++j) {
        total += marginal_negentropy(Z.col(j), bins);
      }
      m.trace_.push_back(total);
      if (config.tol_negentropy > 0.0 &&
          total < config.tol_negentropy * static_cast<double>(d)) {
        break;
      }
    }
    return m;
  }

  // Applies every layer; returns the Gaussianized coordinates and the
  // per-sample accumulated log-det Jacobian. Each row goes through exactly
  // the same scalar path whether it is batched or alone, so single-row and
  // batch results agree bit for bit.
  std::pair<Matrix, Vector> transform(const Matrix& X) const {
    Matrix active = select_active(X, "transform");
    const Index n = active.rows();
    Matrix Y(n, dim_);
    Vector log_det(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo,
                                                  std::size_t hi) {
      Vector y(dim_);
      Vector tmp(dim_);
      for (std::size_t r = lo; r < hi; ++r) {
        y = active.row(static_cast<Index>(r)).transpose();
        double ld = 0.0;
        for (const RbigLayer& layer : layers_) {
          for (Index j = 0; j < dim_; ++j) {
            MarginalMap::Eval e = layer.marginals[static_cast<std::size_t>(j)]
                                      .forward(y[j]);
            y[j] = e.y;
            ld += e.log_deriv;
          }
          tmp.noalias() = layer.rotation * y;
          y.swap(tmp);
        }
        Y.row(static_cast<Index>(r)) = y.transpose();
        log_det[static_cast<Index>(r)] = ld;
      }
    });
    return {std::move(Y), std::move(log_det)};
  }

  // Layers in reverse: undo the rotation (transpose), then the marginals.
  // Dropped constant columns are reinstated at their training values.
  Matrix inverse_transform(const Matrix& Y) const {
    if (Y.cols() != dim_) {
      throw DimensionMismatchError(
          "inverse_transform: expected " + std::to_string(dim_) +
          " columns, got " + std::to_string(Y.cols()));
    }
    check_finite(Y, "inverse_transform");
    const Index n = Y.rows();
    Matrix X(n, input_dim_);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo,
                                                  std::size_t hi) {
      Vector y(dim_);
      Vector z(dim_);
      for (std::size_t r = lo; r < hi; ++r) {
        y = Y.row(static_cast<Index>(r)).transpose();
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
          z.noalias() = it->rotation.transpose() * y;
          for (Index j = 0; j < dim_; ++j) {
            z[j] = it->marginals[static_cast<std::size_t>(j)].inverse(z[j]);
          }
          y.swap(z);
        }
        scatter_row(X, static_cast<Index>(r), y);
      }
    });
    return X;
  }

  LogDensityResult log_density(const Matrix& X) const {
    auto [Y, log_det] = transform(X);
    const Index n = Y.rows();
    LogDensityResult out;
    out.log_p_gauss.resize(n);
    out.log_det_j = std::move(log_det);
    out.log_p.resize(n);
    for (Index i = 0; i < n; ++i) {
      out.log_p_gauss[i] = standard_normal_log_pdf(Y.row(i).transpose());
      out.log_p[i] = out.log_p_gauss[i] + out.log_det_j[i];
    }
    return out;
  }

  // Draws n standard normal vectors and pushes them through the inverse
  // transform. Draw order is row-major, so output is a pure function of the
  // rng seed and n.
  Matrix sample(Index n, RngState& rng) const {
    Matrix Y(n, dim_);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < dim_; ++j) Y(i, j) = rng.normal();
    }
    if (n == 0) return Matrix(0, input_dim_);
    return inverse_transform(Y);
  }

  bool has_trace() const { return !trace_.empty(); }

  // Per-layer summed marginal negentropy recorded during fitting.
  const std::vector<double>& negentropy_trace() const {
    if (trace_.empty()) {
      throw NotRecordedError(
          "negentropy_trace: no convergence trace stored for this model");
    }
    return trace_;
  }

  Index dim() const { return dim_; }
  Index input_dim() const { return input_dim_; }
  const std::vector<RbigLayer>& layers() const { return layers_; }
  const std::vector<Index>& dropped_bands() const { return dropped_bands_; }
  const std::vector<double>& dropped_values() const { return dropped_values_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const RbigConfig& config() const { return config_; }
  int bins_used() const { return bins_used_; }

  // Serialization support.
  static GaussianizationModel from_parts(Index input_dim,
                                         std::vector<RbigLayer> layers,
                                         std::vector<Index> dropped_bands,
                                         std::vector<double> dropped_values,
                                         RbigConfig config, int bins_used,
                                         std::vector<double> trace) {
    GaussianizationModel m;
    m.input_dim_ = input_dim;
    m.dim_ = input_dim - static_cast<Index>(dropped_bands.size());
    m.layers_ = std::move(layers);
    m.dropped_bands_ = std::move(dropped_bands);
    m.dropped_values_ = std::move(dropped_values);
    m.config_ = config;
    m.bins_used_ = bins_used;
    m.trace_ = std::move(trace);
    if (m.layers_.empty() || m.dim_ < 1) {
      throw ParseError("GaussianizationModel: empty layer stack");
    }
    for (const RbigLayer& layer : m.layers_) {
      if (static_cast<Index>(layer.marginals.size()) != m.dim_ ||
          layer.rotation.rows() != m.dim_ || layer.rotation.cols() != m.dim_) {
        throw ParseError("GaussianizationModel: layer dimension mismatch");
      }
    }
    return m;
  }

  // An empty model is only a placeholder for deserialization and container
  // membership; every operation requires a model produced by fit() or
  // from_parts().
  GaussianizationModel() = default;

 private:
  // Drops the recorded constant columns from a full-width input.
  Matrix select_active(const Matrix& X, const char* context) const {
    if (X.cols() != input_dim_) {
      throw DimensionMismatchError(std::string(context) + ": expected " +
                                   std::to_string(input_dim_) +
                                   " columns, got " + std::to_string(X.cols()));
    }
    check_finite(X, context);
    if (dropped_bands_.empty()) return X;
    Matrix out(X.rows(), dim_);
    Index col = 0;
    std::size_t next_drop = 0;
    for (Index j = 0; j < input_dim_; ++j) {
      if (next_drop < dropped_bands_.size() &&
          dropped_bands_[next_drop] == j) {
        ++next_drop;
        continue;
      }
      out.col(col++) = X.col(j);
    }
    return out;
  }

  // Writes an active-width row back into a full-width matrix, filling
  // dropped columns with their constant training values.
  void scatter_row(Matrix& X, Index r, const Vector& y) const {
    Index col = 0;
    std::size_t next_drop = 0;
    for (Index j = 0; j < input_dim_; ++j) {
      if (next_drop < dropped_bands_.size() &&
          dropped_bands_[next_drop] == j) {
        X(r, j) = dropped_values_[next_drop];
        ++next_drop;
      } else {
        X(r, j) = y[col++];
      }
    }
  }

  Index input_dim_ = 0;  // width models accept (before dropping)
  Index dim_ = 0;        // active width after dropping constant columns
  std::vector<RbigLayer> layers_;
  std::vector<Index> dropped_bands_;
  std::vector<double> dropped_values_;
  std::vector<std::string> warnings_;
  std::vector<double> trace_;
  RbigConfig config_;
  int bins_used_ = 0;
};

}  // namespace rbig

#endif  // RBIG_MODEL_HPP_
