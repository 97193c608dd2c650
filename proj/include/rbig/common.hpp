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

#ifndef RBIG_COMMON_HPP_
#define RBIG_COMMON_HPP_

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace rbig {

// All sample containers are dense double matrices, one row per sample and one
// column per feature/band.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

constexpr double kLogTwoPi = 1.8378770664093454836;  // ln(2*pi)

// ---------------------------------------------------------------------------
// Error taxonomy. Each condition the library can reject carries its own type
// so callers (and the CLI's exit-code mapping) can distinguish bad input
// files from domain/fit failures.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument values: probabilities outside (0,1), asymmetric matrices
// where symmetry is required, bad configuration ranges, kind mismatches.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

// Zero-variance column (or identical support points for kernel detectors).
class DegenerateColumnError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

// Nothing fittable at all (e.g. every column constant).
class UnfittableError : public Error {
 public:
  using Error::Error;
};

// Malformed files: wrong magic, truncated payloads, ragged CSV rows.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Curve computations that need both classes present.
class UndefinedCurveError : public Error {
 public:
  using Error::Error;
};

// Requested diagnostic was not stored (e.g. convergence trace after loading
// a model file without its metadata sidecar).
class NotRecordedError : public Error {
 public:
  using Error::Error;
};

inline void check_finite(const Eigen::Ref<const Matrix>& values,
                         const char* context) {
  if (!values.allFinite()) {
    throw InvalidArgumentError(std::string(context) +
                               ": input contains NaN or Inf");
  }
}

// ---------------------------------------------------------------------------
// Threading. A single process-wide cap, settable programmatically or through
// the RBIG_THREADS environment variable; 0 means "use all hardware threads".
// Work is split into contiguous index ranges so results never depend on the
// thread count.
// ---------------------------------------------------------------------------

inline std::atomic<unsigned>& thread_cap_storage() {
  static std::atomic<unsigned> cap{0};
  return cap;
}

inline void set_max_threads(unsigned n) { thread_cap_storage().store(n); }

inline unsigned resolve_threads() {
  unsigned cap = thread_cap_storage().load();
  if (cap == 0) {
    if (const char* env = std::getenv("RBIG_THREADS")) {
      long v = std::strtol(env, nullptr, 10);
      if (v > 0) cap = static_cast<unsigned>(v);
    }
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return cap == 0 ? hw : std::min(cap, hw);
}

// Runs body(begin, end) over a partition of [0, n). The partition depends
// only on n and the resolved thread count; bodies must write to disjoint
// output slots.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  unsigned workers = resolve_threads();
  if (n == 0) return;
  if (workers <= 1 || n < 2 * workers) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace rbig

#endif  // RBIG_COMMON_HPP_
