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

// Umbrella header: iterative Gaussianization density estimation, anomaly and
// change detectors built on it, evaluation metrics, and the file formats the
// command-line tool speaks.

#ifndef RBIG_RBIG_HPP_
#define RBIG_RBIG_HPP_

#include "rbig/common.hpp"      // IWYU pragma: export
#include "rbig/detectors.hpp"   // IWYU pragma: export
#include "rbig/evaluation.hpp"  // IWYU pragma: export
#include "rbig/marginal.hpp"    // IWYU pragma: export
#include "rbig/model.hpp"       // IWYU pragma: export
#include "rbig/numerics.hpp"    // IWYU pragma: export
#include "rbig/raster.hpp"      // IWYU pragma: export
#include "rbig/rng.hpp"         // IWYU pragma: export
#include "rbig/serialize.hpp"   // IWYU pragma: export
#include "rbig/toy.hpp"         // IWYU pragma: export

#endif  // RBIG_RBIG_HPP_
