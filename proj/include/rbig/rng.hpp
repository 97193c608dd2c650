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

#ifndef RBIG_RNG_HPP_
#define RBIG_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace rbig {

// Seedable random source with explicitly spelled-out mappings from raw
// 64-bit engine output to doubles, so that identical seeds give identical
// streams and derived streams are independent of evaluation order (needed
// for parallel bootstrap runs).
class RngState {
 public:
  explicit RngState(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform draw in the open interval (0, 1): top 53 bits, offset by half a
  // step so 0 and 1 are unreachable.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the cosine branch of Box-Muller. No cached spare:
  // every call consumes exactly two engine outputs, which keeps draw
  // sequences independent of call-site interleaving.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  // Uniform index in [0, n). u is strictly inside (0,1) so the result never
  // reaches n.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  }

  // Derives a child generator from the stored seed and a stream number.
  // Depends only on (seed, stream), not on how much of this generator's
  // sequence has been consumed.
  RngState spawn(std::uint64_t stream) const {
    return RngState(splitmix64(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace rbig

#endif  // RBIG_RNG_HPP_
