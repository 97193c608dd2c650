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

#ifndef RBIG_RASTER_HPP_
#define RBIG_RASTER_HPP_

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rbig/common.hpp"

namespace rbig {

// ---------------------------------------------------------------------------
// Little-endian binary primitives, shared with model serialization.
// ---------------------------------------------------------------------------

namespace io {

inline void put_u8(std::ostream& os, std::uint8_t v) {
  os.put(static_cast<char>(v));
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}

inline void put_f64(std::ostream& os, double v) {
  put_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint8_t get_u8(std::istream& is, const char* what) {
  int c = is.get();
  if (c == EOF) throw ParseError(std::string("truncated file reading ") + what);
  return static_cast<std::uint8_t>(c);
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
  char b[4];
  if (!is.read(b, 4)) {
    throw ParseError(std::string("truncated file reading ") + what);
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(b[i]))
         << (8 * i);
  }
  return v;
}

inline std::uint64_t get_u64(std::istream& is, const char* what) {
  char b[8];
  if (!is.read(b, 8)) {
    throw ParseError(std::string("truncated file reading ") + what);
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(b[i]))
         << (8 * i);
  }
  return v;
}

inline double get_f64(std::istream& is, const char* what) {
  return std::bit_cast<double>(get_u64(is, what));
}

// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view token, const std::string& where) {
  // Trim surrounding whitespace (and a stray carriage return).
  std::size_t begin = token.find_first_not_of(" \t\r");
  std::size_t end = token.find_last_not_of(" \t\r");
  if (begin == std::string_view::npos) {
    throw ParseError(where + ": empty numeric cell");
  }
  token = token.substr(begin, end - begin + 1);
  double value = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError(where + ": cannot parse '" + std::string(token) +
                     "' as a number");
  }
  return value;
}

}  // namespace io

// ---------------------------------------------------------------------------
// Multiband raster container. Storage is band-sequential: all of band 0's
// pixels in row-major order, then band 1's, etc.
// ---------------------------------------------------------------------------

struct RasterImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t bands = 0;
  bool has_nodata = false;
  double nodata = 0.0;
  std::vector<double> values;
  std::vector<std::string> band_names;  // optional, stored in a JSON sidecar

  double& at(std::uint32_t band, std::uint32_t row, std::uint32_t col) {
    return values[(static_cast<std::size_t>(band) * height + row) * width +
                  col];
  }
  double at(std::uint32_t band, std::uint32_t row, std::uint32_t col) const {
    return values[(static_cast<std::size_t>(band) * height + row) * width +
                  col];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

namespace detail {

constexpr char kRasterMagic[4] = {'M', 'B', 'R', 'S'};
constexpr std::uint8_t kRasterVersion = 1;

inline std::string sidecar_path(const std::string& path) {
  return path + ".json";
}

}  // namespace detail

inline void write_raster(const RasterImage& img, const std::string& path) {
  const std::uint64_t expected = static_cast<std::uint64_t>(img.width) *
                                 img.height * img.bands;
  if (expected != img.values.size()) {
    throw InvalidArgumentError(
        "write_raster: header dims disagree with value count");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("write_raster: cannot open " + path);
  os.write(detail::kRasterMagic, 4);
  io::put_u8(os, detail::kRasterVersion);
  io::put_u32(os, img.width);
  io::put_u32(os, img.height);
  io::put_u32(os, img.bands);
  io::put_u8(os, img.has_nodata ? 1 : 0);
  io::put_f64(os, img.has_nodata ? img.nodata : 0.0);
  for (double v : img.values) io::put_f64(os, v);
  if (!os) throw ParseError("write_raster: write failed for " + path);
  os.close();

  if (!img.band_names.empty()) {
    std::ofstream js(detail::sidecar_path(path));
    if (!js) {
      throw ParseError("write_raster: cannot open sidecar for " + path);
    }
    js << "{\n  \"band_names\": [";
    for (std::size_t i = 0; i < img.band_names.size(); ++i) {
      if (i) js << ", ";
      js << '"' << img.band_names[i] << '"';
    }
    js << "]\n}\n";
  }
}

inline RasterImage read_raster(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("read_raster: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, detail::kRasterMagic, 4) != 0) {
    throw ParseError("read_raster: bad magic in " + path);
  }
  const std::uint8_t version = io::get_u8(is, "version");
  if (version != detail::kRasterVersion) {
    throw ParseError("read_raster: unsupported version " +
                     std::to_string(version) + " in " + path);
  }
  RasterImage img;
  img.width = io::get_u32(is, "width");
  img.height = io::get_u32(is, "height");
  img.bands = io::get_u32(is, "bands");
  const std::uint64_t count = static_cast<std::uint64_t>(img.width) *
                              img.height * img.bands;
  if (img.width == 0 || img.height == 0 || img.bands == 0 ||
      count > (std::uint64_t{1} << 33)) {
    throw ParseError("read_raster: unreasonable dimensions in " + path);
  }
  img.has_nodata = io::get_u8(is, "nodata flag") != 0;
  img.nodata = io::get_f64(is, "nodata value");
  if (!img.has_nodata) img.nodata = 0.0;
  img.values.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    img.values[i] = io::get_f64(is, "payload");
  }
  if (is.peek() != EOF) {
    throw ParseError("read_raster: trailing bytes after payload in " + path);
  }
  for (double v : img.values) {
    if (!std::isfinite(v) && !(img.has_nodata && v == img.nodata)) {
      throw ParseError("read_raster: non-finite pixel value in " + path);
    }
  }

  std::ifstream js(detail::sidecar_path(path));
  if (js) {
    // Minimal sidecar reader: pull the quoted names out of the band_names
    // array. The writer controls the format, so a simple scan suffices.
    std::stringstream ss;
    ss << js.rdbuf();
    const std::string text = ss.str();
    std::size_t pos = text.find("\"band_names\"");
    if (pos != std::string::npos) {
      pos = text.find('[', pos);
      std::size_t close = text.find(']', pos);
      while (pos != std::string::npos && close != std::string::npos) {
        std::size_t q1 = text.find('"', pos + 1);
        if (q1 == std::string::npos || q1 > close) break;
        std::size_t q2 = text.find('"', q1 + 1);
        if (q2 == std::string::npos || q2 > close) break;
        img.band_names.push_back(text.substr(q1 + 1, q2 - q1 - 1));
        pos = q2 + 1;
      }
      if (img.band_names.size() != img.bands) {
        throw ParseError("read_raster: sidecar band_names count (" +
                         std::to_string(img.band_names.size()) +
                         ") disagrees with bands (" +
                         std::to_string(img.bands) + ") for " + path);
      }
    }
  }
  return img;
}

// Pixels-as-samples view: one row per non-nodata pixel in row-major scan
// order. pixel_index maps each row back to its linear pixel position.
inline std::pair<Matrix, std::vector<Index>> flatten_to_matrix(
    const RasterImage& img) {
  const std::size_t npx = img.pixel_count();
  std::vector<Index> pixel_index;
  pixel_index.reserve(npx);
  for (std::size_t p = 0; p < npx; ++p) {
    bool valid = true;
    if (img.has_nodata) {
      for (std::uint32_t b = 0; b < img.bands; ++b) {
        if (img.values[static_cast<std::size_t>(b) * npx + p] == img.nodata) {
          valid = false;
          break;
        }
      }
    }
    if (valid) pixel_index.push_back(static_cast<Index>(p));
  }
  if (pixel_index.empty()) {
    throw InvalidArgumentError("flatten_to_matrix: every pixel is nodata");
  }
  Matrix X(static_cast<Index>(pixel_index.size()), img.bands);
  for (Index r = 0; r < X.rows(); ++r) {
    const std::size_t p = static_cast<std::size_t>(pixel_index
        [static_cast<std::size_t>(r)]);
    for (std::uint32_t b = 0; b < img.bands; ++b) {
      X(r, static_cast<Index>(b)) =
          img.values[static_cast<std::size_t>(b) * npx + p];
    }
  }
  return {std::move(X), std::move(pixel_index)};
}

// Single-band score map aligned to a source raster's geometry. Pixels with
// no score carry the nodata sentinel.
inline RasterImage make_score_map(std::uint32_t width, std::uint32_t height,
                                  const Vector& scores,
                                  const std::vector<Index>& pixel_index) {
  if (scores.size() != static_cast<Index>(pixel_index.size())) {
    throw DimensionMismatchError(
        "make_score_map: scores and pixel_index differ in length");
  }
  RasterImage map;
  map.width = width;
  map.height = height;
  map.bands = 1;
  const std::size_t npx = map.pixel_count();
  const bool full = pixel_index.size() == npx;
  map.has_nodata = !full;
  map.nodata = full ? 0.0 : -9999.0;
  map.values.assign(npx, map.nodata);
  for (Index r = 0; r < scores.size(); ++r) {
    map.values[static_cast<std::size_t>(pixel_index
        [static_cast<std::size_t>(r)])] = scores[r];
  }
  return map;
}

// Ground-truth mask stored as a single-band raster; nonzero = positive.
// Geometry must match the raster the scores came from.
inline std::vector<int> read_mask(const std::string& path,
                                  std::uint32_t expected_width,
                                  std::uint32_t expected_height) {
  RasterImage img = read_raster(path);
  if (img.bands != 1) {
    throw ParseError("read_mask: mask must be single-band, got " +
                     std::to_string(img.bands) + " bands in " + path);
  }
  if (img.width != expected_width || img.height != expected_height) {
    throw DimensionMismatchError(
        "read_mask: mask geometry " + std::to_string(img.width) + "x" +
        std::to_string(img.height) + " does not match raster " +
        std::to_string(expected_width) + "x" +
        std::to_string(expected_height));
  }
  std::vector<int> labels(img.pixel_count());
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const double v = img.values[p];
    if (img.has_nodata && v == img.nodata) {
      labels[p] = 0;
    } else {
      labels[p] = v != 0.0 ? 1 : 0;
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Numeric CSV with a header row. Locale-independent: std::to_chars /
// std::from_chars only, so round-trips are exact.
// ---------------------------------------------------------------------------

struct CsvMatrix {
  Matrix values;
  std::vector<std::string> columns;
};

inline void write_csv_matrix(const std::string& path, const Matrix& values,
                             const std::vector<std::string>& columns) {
  if (static_cast<Index>(columns.size()) != values.cols()) {
    throw InvalidArgumentError(
        "write_csv_matrix: header width does not match matrix");
  }
  std::ofstream os(path);
  if (!os) throw ParseError("write_csv_matrix: cannot open " + path);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) os << ',';
    os << columns[j];
  }
  os << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) os << ',';
      os << io::format_double(values(i, j));
    }
    os << '\n';
  }
  if (!os) throw ParseError("write_csv_matrix: write failed for " + path);
}

inline CsvMatrix read_csv_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("read_csv_matrix: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) {
    throw ParseError(path + ":1: missing header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvMatrix out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.columns.push_back(line.substr(
        start, comma == std::string::npos ? comma : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  const std::size_t ncols = out.columns.size();

  std::vector<double> data;
  std::size_t nrows = 0;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    std::size_t cells = 0;
    start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view token(line);
      token = token.substr(
          start, comma == std::string::npos ? comma : comma - start);
      data.push_back(io::parse_double(token, where));
      ++cells;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells != ncols) {
      throw ParseError(where + ": expected " + std::to_string(ncols) +
                       " columns, got " + std::to_string(cells));
    }
    ++nrows;
  }
  out.values.resize(static_cast<Index>(nrows), static_cast<Index>(ncols));
  for (std::size_t i = 0; i < nrows; ++i) {
    for (std::size_t j = 0; j < ncols; ++j) {
      out.values(static_cast<Index>(i), static_cast<Index>(j)) =
          data[i * ncols + j];
    }
  }
  return out;
}

}  // namespace rbig

#endif  // RBIG_RASTER_HPP_
