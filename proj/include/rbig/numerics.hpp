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

#ifndef RBIG_NUMERICS_HPP_
#define RBIG_NUMERICS_HPP_

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "rbig/common.hpp"
#include "rbig/rng.hpp"

namespace rbig {

// Sample mean and unbiased covariance (divisor l-1). The returned covariance
// is explicitly symmetrized so downstream symmetry checks never trip on
// accumulation order.
inline std::pair<Vector, Matrix> mean_and_covariance(
    const Eigen::Ref<const Matrix>& X) {
  const Index l = X.rows();
  if (l < 2) {
    throw InsufficientSamplesError(
        "mean_and_covariance: need at least 2 samples, got " +
        std::to_string(l));
  }
  check_finite(X, "mean_and_covariance");
  Vector mean = X.colwise().mean();
  Matrix centered = X.rowwise() - mean.transpose();
  Matrix cov =
      (centered.transpose() * centered) / static_cast<double>(l - 1);
  cov = ((cov + cov.transpose()) * 0.5).eval();
  return {std::move(mean), std::move(cov)};
}

struct EigResult {
  Vector values;   // descending
  Matrix vectors;  // matching eigenvectors in columns
};

// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
// Each eigenvector's sign is canonicalized (largest-magnitude entry made
// positive) so the decomposition is a deterministic function of A.
inline EigResult symmetric_eig(const Eigen::Ref<const Matrix>& A) {
  if (A.rows() != A.cols()) {
    throw InvalidArgumentError("symmetric_eig: matrix must be square");
  }
  check_finite(A, "symmetric_eig");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * scale) {
    throw InvalidArgumentError("symmetric_eig: matrix is not symmetric");
  }
  Matrix sym = (A + A.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error("symmetric_eig: eigensolver failed to converge");
  }
  const Index d = A.rows();
  EigResult out;
  out.values.resize(d);
  out.vectors.resize(d, d);
  // Eigen returns ascending order; reverse it.
  for (Index k = 0; k < d; ++k) {
    out.values[k] = solver.eigenvalues()[d - 1 - k];
    out.vectors.col(k) = solver.eigenvectors().col(d - 1 - k);
    Index imax = 0;
    out.vectors.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.vectors(imax, k) < 0.0) out.vectors.col(k) = -out.vectors.col(k);
  }
  return out;
}

// Solves A x = b for symmetric positive definite A via Cholesky. Callers are
// expected to regularize near-singular matrices before calling.
inline Vector solve_spd(const Eigen::Ref<const Matrix>& A,
                        const Eigen::Ref<const Vector>& b) {
  if (A.rows() != A.cols()) {
    throw InvalidArgumentError("solve_spd: matrix must be square");
  }
  if (A.rows() != b.size()) {
    throw DimensionMismatchError("solve_spd: size of b does not match A");
  }
  check_finite(A, "solve_spd");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InvalidArgumentError("solve_spd: matrix is not symmetric");
  }
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError(
        "solve_spd: matrix is not positive definite");
  }
  return llt.solve(b);
}

// Standard normal CDF. erfc keeps relative accuracy deep in the lower tail,
// which matters when probing clamped CDF values near 1/(4l).
inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

// Inverse standard normal CDF: rational initial guess (Acklam's
// approximation) polished by two Halley steps against standard_normal_cdf.
// Final accuracy is a few ulps, far inside the 1e-9 contract.
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgumentError("inverse_normal_cdf: p must lie in (0, 1)");
  }
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  for (int iter = 0; iter < 2; ++iter) {
    double e = standard_normal_cdf(x) - p;
    double u = e * 2.506628274631000502 * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

// log-density of the d-dimensional standard normal at y.
inline double standard_normal_log_pdf(const Eigen::Ref<const Vector>& y) {
  return -0.5 * static_cast<double>(y.size()) * kLogTwoPi -
         0.5 * y.squaredNorm();
}

inline double standard_normal_log_pdf(double y) {
  return -0.5 * kLogTwoPi - 0.5 * y * y;
}

// Haar-ish random rotation: QR of a matrix of standard normal draws with the
// R-diagonal sign correction, then a final column flip to force det = +1.
inline Matrix random_rotation(Index d, RngState& rng) {
  if (d < 1) {
    throw InvalidArgumentError("random_rotation: dimension must be >= 1");
  }
  Matrix G(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      G(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < d; ++k) {
    if (R(k, k) < 0.0) Q.col(k) = -Q.col(k);
  }
  if (Q.determinant() < 0.0) Q.col(d - 1) = -Q.col(d - 1);
  return Q;
}

}  // namespace rbig

#endif  // RBIG_NUMERICS_HPP_
