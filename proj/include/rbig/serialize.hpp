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

#ifndef RBIG_SERIALIZE_HPP_
#define RBIG_SERIALIZE_HPP_

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rbig/detectors.hpp"
#include "rbig/model.hpp"
#include "rbig/raster.hpp"

namespace rbig {

// Single self-describing binary container for every detector kind:
//   magic "RBIG" | u32 version | u32 kind | kind-specific payload
// All integers little-endian, all doubles little-endian IEEE-754 bit
// patterns, so write -> read -> write reproduces files byte for byte.
// Density models additionally get a JSON sidecar (<path>.json) carrying
// fit diagnostics (convergence trace etc.); the sidecar is optional on load.

namespace detail {

constexpr char kModelMagic[4] = {'R', 'B', 'I', 'G'};
constexpr std::uint32_t kModelVersion = 1;

constexpr std::uint32_t kKindRbig = 0;
constexpr std::uint32_t kKindRx = 1;
constexpr std::uint32_t kKindKrx = 2;
constexpr std::uint32_t kKindKde = 3;
constexpr std::uint32_t kKindHybrid = 4;

inline void write_vector(std::ostream& os, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) io::put_f64(os, v[i]);
}

inline Vector read_vector(std::istream& is, Index n, const char* what) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = io::get_f64(is, what);
  return v;
}

inline void write_matrix_rowmajor(std::ostream& os, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) io::put_f64(os, m(i, j));
  }
}

inline Matrix read_matrix_rowmajor(std::istream& is, Index rows, Index cols,
                                   const char* what) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = io::get_f64(is, what);
  }
  return m;
}

inline void write_marginal(std::ostream& os, const MarginalMap& map) {
  const std::uint32_t B =
      static_cast<std::uint32_t>(map.bin_densities().size());
  io::put_u32(os, B);
  io::put_f64(os, map.support_lo());
  io::put_f64(os, map.support_hi());
  write_vector(os, map.bin_edges());
  write_vector(os, map.bin_densities());
  write_vector(os, map.cdf_at_edges());
}

inline MarginalMap read_marginal(std::istream& is) {
  const std::uint32_t B = io::get_u32(is, "marginal bins");
  if (B < 2 || B > (1u << 20)) {
    throw ParseError("model file: unreasonable marginal bin count " +
                     std::to_string(B));
  }
  const double lo = io::get_f64(is, "support_lo");
  const double hi = io::get_f64(is, "support_hi");
  Vector edges = read_vector(is, B + 1, "bin edges");
  Vector dens = read_vector(is, B, "bin densities");
  Vector cdf = read_vector(is, B + 1, "cdf");
  return MarginalMap::from_parts(std::move(edges), std::move(dens),
                                 std::move(cdf), lo, hi);
}

inline void write_rbig_block(std::ostream& os,
                             const GaussianizationModel& m) {
  io::put_u32(os, static_cast<std::uint32_t>(m.input_dim()));
  io::put_u32(os, static_cast<std::uint32_t>(m.dropped_bands().size()));
  for (std::size_t i = 0; i < m.dropped_bands().size(); ++i) {
    io::put_u32(os, static_cast<std::uint32_t>(m.dropped_bands()[i]));
    io::put_f64(os, m.dropped_values()[i]);
  }
  io::put_u32(os, static_cast<std::uint32_t>(m.layers().size()));
  io::put_u32(os, static_cast<std::uint32_t>(m.bins_used()));
  io::put_u32(os, m.config().rotation == RotationKind::kPca ? 0u : 1u);
  io::put_u64(os, m.config().seed);
  io::put_f64(os, m.config().tol_negentropy);
  io::put_u32(os, static_cast<std::uint32_t>(m.config().max_layers));
  for (const RbigLayer& layer : m.layers()) {
    for (const MarginalMap& map : layer.marginals) write_marginal(os, map);
    write_matrix_rowmajor(os, layer.rotation);
  }
}

inline GaussianizationModel read_rbig_block(std::istream& is,
                                            std::vector<double> trace) {
  const Index input_dim =
      static_cast<Index>(io::get_u32(is, "input dimension"));
  const std::uint32_t n_dropped = io::get_u32(is, "dropped count");
  if (input_dim < 1 || n_dropped >= static_cast<std::uint32_t>(input_dim)) {
    throw ParseError("model file: inconsistent dimension/drop counts");
  }
  std::vector<Index> dropped(n_dropped);
  std::vector<double> dropped_values(n_dropped);
  for (std::uint32_t i = 0; i < n_dropped; ++i) {
    dropped[i] = static_cast<Index>(io::get_u32(is, "dropped index"));
    dropped_values[i] = io::get_f64(is, "dropped value");
  }
  const std::uint32_t n_layers = io::get_u32(is, "layer count");
  if (n_layers == 0 || n_layers > (1u << 16)) {
    throw ParseError("model file: unreasonable layer count " +
                     std::to_string(n_layers));
  }
  RbigConfig config;
  const std::uint32_t bins_used = io::get_u32(is, "bins");
  config.bins = static_cast<int>(bins_used);
  config.rotation = io::get_u32(is, "rotation kind") == 0
                        ? RotationKind::kPca
                        : RotationKind::kRandom;
  config.seed = io::get_u64(is, "seed");
  config.tol_negentropy = io::get_f64(is, "tolerance");
  config.max_layers = static_cast<int>(io::get_u32(is, "max layers"));

  const Index d = input_dim - static_cast<Index>(n_dropped);
  std::vector<RbigLayer> layers;
  layers.reserve(n_layers);
  for (std::uint32_t li = 0; li < n_layers; ++li) {
    RbigLayer layer;
    layer.marginals.reserve(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j) {
      layer.marginals.push_back(read_marginal(is));
    }
    layer.rotation = read_matrix_rowmajor(is, d, d, "rotation");
    layers.push_back(std::move(layer));
  }
  return GaussianizationModel::from_parts(
      input_dim, std::move(layers), std::move(dropped),
      std::move(dropped_values), config, static_cast<int>(bins_used),
      std::move(trace));
}

inline void write_rx_block(std::ostream& os, const RxModel& m) {
  io::put_u32(os, static_cast<std::uint32_t>(m.mean.size()));
  io::put_f64(os, m.reg_lambda);
  write_vector(os, m.mean);
  write_matrix_rowmajor(os, m.precision);
}

inline RxModel read_rx_block(std::istream& is) {
  const Index d = static_cast<Index>(io::get_u32(is, "rx dimension"));
  if (d < 1 || d > (1 << 20)) {
    throw ParseError("model file: unreasonable rx dimension");
  }
  RxModel m;
  m.reg_lambda = io::get_f64(is, "rx reg_lambda");
  m.mean = read_vector(is, d, "rx mean");
  m.precision = read_matrix_rowmajor(is, d, d, "rx precision");
  return m;
}

inline void write_kernel_block(std::ostream& os, const KernelModel& m) {
  io::put_u32(os, static_cast<std::uint32_t>(m.support.rows()));
  io::put_u32(os, static_cast<std::uint32_t>(m.support.cols()));
  io::put_u8(os, m.sigma_rule == SigmaRule::kMedian ? 0 : 1);
  io::put_f64(os, m.sigma);
  io::put_f64(os, m.reg_effective);
  write_matrix_rowmajor(os, m.support);
}

inline KernelModel read_kernel_block(std::istream& is, KernelKind kind) {
  const Index n = static_cast<Index>(io::get_u32(is, "support rows"));
  const Index d = static_cast<Index>(io::get_u32(is, "support cols"));
  if (n < 2 || d < 1 || n > (1 << 24) || d > (1 << 20)) {
    throw ParseError("model file: unreasonable kernel support shape");
  }
  KernelModel m;
  m.kind = kind;
  m.sigma_rule = io::get_u8(is, "sigma rule") == 0 ? SigmaRule::kMedian
                                                   : SigmaRule::kMean;
  m.sigma = io::get_f64(is, "sigma");
  m.reg_effective = io::get_f64(is, "kernel regularization");
  m.support = read_matrix_rowmajor(is, n, d, "kernel support");
  if (!(m.sigma > 0.0)) {
    throw ParseError("model file: non-positive kernel lengthscale");
  }
  // The factorization is derived state: rebuild rather than store.
  if (kind == KernelKind::kKrx) build_krx_factor(m);
  return m;
}

// --- metadata sidecar -------------------------------------------------------

inline void write_sidecar(const std::string& path, const char* kind,
                          const GaussianizationModel& m) {
  std::ofstream os(sidecar_path(path));
  if (!os) throw ParseError("save_model: cannot open sidecar for " + path);
  os << "{\n";
  os << "  \"format\": \"rbig-model\",\n";
  os << "  \"kind\": \"" << kind << "\",\n";
  os << "  \"layers\": " << m.layers().size() << ",\n";
  os << "  \"bins\": " << m.bins_used() << ",\n";
  os << "  \"rotation\": \""
     << (m.config().rotation == RotationKind::kPca ? "pca" : "random")
     << "\",\n";
  os << "  \"seed\": " << m.config().seed << ",\n";
  os << "  \"tol_negentropy\": "
     << io::format_double(m.config().tol_negentropy) << ",\n";
  os << "  \"dropped_bands\": [";
  for (std::size_t i = 0; i < m.dropped_bands().size(); ++i) {
    if (i) os << ", ";
    os << m.dropped_bands()[i];
  }
  os << "],\n";
  os << "  \"negentropy_trace\": [";
  const std::vector<double> trace =
      m.has_trace() ? m.negentropy_trace() : std::vector<double>{};
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i) os << ", ";
    os << io::format_double(trace[i]);
  }
  os << "]\n";
  os << "}\n";
}

// Pulls the negentropy_trace array back out of the sidecar, if one exists.
inline std::vector<double> read_sidecar_trace(const std::string& path) {
  std::ifstream is(sidecar_path(path));
  if (!is) return {};
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  std::size_t pos = text.find("\"negentropy_trace\"");
  if (pos == std::string::npos) return {};
  pos = text.find('[', pos);
  std::size_t close = text.find(']', pos);
  if (pos == std::string::npos || close == std::string::npos) return {};
  std::vector<double> trace;
  std::size_t start = pos + 1;
  while (start < close) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos || comma > close) comma = close;
    std::string token = text.substr(start, comma - start);
    if (token.find_first_not_of(" \t\r\n") != std::string::npos) {
      trace.push_back(io::parse_double(token, sidecar_path(path)));
    }
    start = comma + 1;
  }
  return trace;
}

}  // namespace detail

inline const char* detector_kind_name(const DetectorModel& model) {
  return std::visit(
      [](const auto& m) -> const char* {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RxModel>) {
          return "rx";
        } else if constexpr (std::is_same_v<T, KernelModel>) {
          return m.kind == KernelKind::kKrx ? "krx" : "kde";
        } else if constexpr (std::is_same_v<T, GaussianizationModel>) {
          return "rbig";
        } else {
          return "hybrid";
        }
      },
      model);
}

inline void save_model(const DetectorModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("save_model: cannot open " + path);
  os.write(detail::kModelMagic, 4);
  io::put_u32(os, detail::kModelVersion);
  std::visit(
      [&os, &path](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RxModel>) {
          io::put_u32(os, detail::kKindRx);
          detail::write_rx_block(os, m);
        } else if constexpr (std::is_same_v<T, KernelModel>) {
          io::put_u32(os, m.kind == KernelKind::kKrx ? detail::kKindKrx
                                                     : detail::kKindKde);
          detail::write_kernel_block(os, m);
        } else if constexpr (std::is_same_v<T, GaussianizationModel>) {
          io::put_u32(os, detail::kKindRbig);
          detail::write_rbig_block(os, m);
          detail::write_sidecar(path, "rbig", m);
        } else {
          io::put_u32(os, detail::kKindHybrid);
          io::put_f64(os, m.retain_fraction);
          io::put_u64(os, static_cast<std::uint64_t>(m.retained.size()));
          for (Index idx : m.retained) {
            io::put_u64(os, static_cast<std::uint64_t>(idx));
          }
          detail::write_rx_block(os, m.rx);
          detail::write_rbig_block(os, m.density);
          detail::write_sidecar(path, "hybrid", m.density);
        }
      },
      model);
  if (!os) throw ParseError("save_model: write failed for " + path);
}

inline DetectorModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("load_model: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, detail::kModelMagic, 4) != 0) {
    throw ParseError("load_model: bad magic in " + path);
  }
  const std::uint32_t version = io::get_u32(is, "version");
  if (version != detail::kModelVersion) {
    throw ParseError("load_model: unsupported version " +
                     std::to_string(version) + " in " + path);
  }
  const std::uint32_t kind = io::get_u32(is, "kind");
  DetectorModel out = [&]() -> DetectorModel {
    switch (kind) {
      case detail::kKindRx:
        return detail::read_rx_block(is);
      case detail::kKindKrx:
        return detail::read_kernel_block(is, KernelKind::kKrx);
      case detail::kKindKde:
        return detail::read_kernel_block(is, KernelKind::kKde);
      case detail::kKindRbig:
        return detail::read_rbig_block(is,
                                       detail::read_sidecar_trace(path));
      case detail::kKindHybrid: {
        HybridModel m;
        m.retain_fraction = io::get_f64(is, "retain fraction");
        const std::uint64_t n = io::get_u64(is, "retained count");
        if (n > (std::uint64_t{1} << 32)) {
          throw ParseError("model file: unreasonable retained count");
        }
        m.retained.resize(static_cast<std::size_t>(n));
        for (std::uint64_t i = 0; i < n; ++i) {
          m.retained[static_cast<std::size_t>(i)] =
              static_cast<Index>(io::get_u64(is, "retained index"));
        }
        m.rx = detail::read_rx_block(is);
        m.density = detail::read_rbig_block(
            is, detail::read_sidecar_trace(path));
        return m;
      }
      default:
        throw ParseError("load_model: unknown detector kind " +
                         std::to_string(kind) + " in " + path);
    }
  }();
  if (is.peek() != EOF) {
    throw ParseError("load_model: trailing bytes in " + path);
  }
  return out;
}

}  // namespace rbig

#endif  // RBIG_SERIALIZE_HPP_
