// Copyright 2026 The cci Authors
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

// Sampled 2D fields: the SDFG dump format, occupancy components and the
// zero level set.

#ifndef CCI_GRID_HPP_
#define CCI_GRID_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

#include "cci/interpolation.hpp"

namespace cci {

/// Row-major samples at cell centers; row j is y = lo.y + (j + 0.5) * dy.
struct Grid {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  V2 lo = V2::Zero();
  V2 hi = V2::Ones();
  std::vector<double> values;

  V2 cell_center(std::uint32_t i, std::uint32_t j) const {
    return V2(lo.x() + (i + 0.5) * (hi.x() - lo.x()) / width, lo.y() + (j + 0.5) * (hi.y() - lo.y()) / height);
  }
  double at(std::uint32_t i, std::uint32_t j) const { return values[std::size_t{j} * width + i]; }
};

template <class Field>
Grid sample_grid(const Field& f, const V2& lo, const V2& hi, std::uint32_t res) {
  if (res == 0) throw InvalidInput("grid resolution must be positive");
  Grid g;
  g.width = g.height = res;
  g.lo = lo;
  g.hi = hi;
  g.values.resize(std::size_t{res} * res);
  for (std::uint32_t j = 0; j < res; ++j)
    for (std::uint32_t i = 0; i < res; ++i) g.values[std::size_t{j} * res + i] = f(g.cell_center(i, j));
  return g;
}

inline Grid sample_env(const EnvInterpSdf<2>& env, const V2& lo, const V2& hi, std::uint32_t res) {
  return sample_grid([&](const V2& x) { return env.value(x); }, lo, hi, res);
}

// ---------------------------------------------------------------------------
// SDFG: "SDFG", u32 width, u32 height, u32 reserved (zero), then
// width * height f64 values. Everything little-endian.

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 4);
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw InvalidInput("SDFG: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
  return v;
}

}  // namespace detail

inline void write_sdfg(std::ostream& out, const Grid& g) {
  out.write("SDFG", 4);
  detail::put_u32(out, g.width);
  detail::put_u32(out, g.height);
  detail::put_u32(out, 0);
  for (double v : g.values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
    out.write(b, 8);
  }
}

/// Reads values and size; the sampled box is not stored in the file.
inline Grid read_sdfg(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SDFG", 4) != 0) throw InvalidInput("SDFG: bad magic");
  Grid g;
  g.width = detail::get_u32(in);
  g.height = detail::get_u32(in);
  detail::get_u32(in);
  g.values.resize(std::size_t{g.width} * g.height);
  for (auto& v : g.values) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw InvalidInput("SDFG: truncated data");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t{b[i]} << (8 * i);
    v = std::bit_cast<double>(bits);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Components

/// Connected components of the cells where mask is set, by flood fill.
inline int count_components(const std::vector<std::uint8_t>& mask, std::uint32_t w, std::uint32_t h,
                            bool eight_connected) {
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<std::size_t> stack;
  int count = 0;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || seen[start]) continue;
    ++count;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      std::size_t c = stack.back();
      stack.pop_back();
      const auto i = static_cast<std::int64_t>(c % w), j = static_cast<std::int64_t>(c / w);
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if ((di == 0 && dj == 0) || (!eight_connected && di != 0 && dj != 0)) continue;
          std::int64_t ni = i + di, nj = j + dj;
          if (ni < 0 || nj < 0 || ni >= w || nj >= h) continue;
          std::size_t n = static_cast<std::size_t>(nj) * w + static_cast<std::size_t>(ni);
          if (mask[n] && !seen[n]) {
            seen[n] = 1;
            stack.push_back(n);
          }
        }
    }
  }
  return count;
}

struct ComponentCounts {
  int free = 0;
  int occupied = 0;
  bool operator==(const ComponentCounts&) const = default;
};

/// Free space is 8-connected and occupied space 4-connected, a complementary
/// pair. Free wedges between two overlapping obstacles narrow to a point and
/// leave single cells that only touch the rest diagonally.
inline ComponentCounts grid_components(const Grid& g) {
  std::vector<std::uint8_t> free(g.values.size()), occ(g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    occ[i] = occupied(g.values[i]) ? 1 : 0;
    free[i] = 1 - occ[i];
  }
  return {count_components(free, g.width, g.height, true), count_components(occ, g.width, g.height, false)};
}

// ---------------------------------------------------------------------------
// Zero level set

/// Marching squares over cell centers with linear edge interpolation. Saddle
/// cells are split by the sign of the cell average.
inline std::vector<std::pair<V2, V2>> zero_contour(const Grid& g) {
  std::vector<std::pair<V2, V2>> out;
  if (g.width < 2 || g.height < 2) return out;
  auto cross = [](const V2& a, double va, const V2& b, double vb) {
    double t = va / (va - vb);
    return V2(a + t * (b - a));
  };
  for (std::uint32_t j = 0; j + 1 < g.height; ++j)
    for (std::uint32_t i = 0; i + 1 < g.width; ++i) {
      // Corners counter-clockwise from the lower left.
      const V2 p[4] = {g.cell_center(i, j), g.cell_center(i + 1, j), g.cell_center(i + 1, j + 1),
                       g.cell_center(i, j + 1)};
      const double v[4] = {g.at(i, j), g.at(i + 1, j), g.at(i + 1, j + 1), g.at(i, j + 1)};
      int code = 0;
      for (int k = 0; k < 4; ++k)
        if (v[k] > 0.0) code |= 1 << k;
      if (code == 0 || code == 15) continue;
      V2 e[4];
      bool has[4];
      for (int k = 0; k < 4; ++k) {
        int l = (k + 1) % 4;
        has[k] = (v[k] > 0.0) != (v[l] > 0.0);
        if (has[k]) e[k] = cross(p[k], v[k], p[l], v[l]);
      }
      if (code == 5 || code == 10) {
        const bool center_pos = (v[0] + v[1] + v[2] + v[3]) > 0.0;
        // Pair each edge with a neighbor so the separated corners are the
        // ones whose sign differs from the center.
        if ((code == 5) == center_pos) {
          out.emplace_back(e[0], e[1]);
          out.emplace_back(e[2], e[3]);
        } else {
          out.emplace_back(e[3], e[0]);
          out.emplace_back(e[1], e[2]);
        }
        continue;
      }
      V2 seg[2];
      int n = 0;
      for (int k = 0; k < 4; ++k)
        if (has[k]) seg[n++] = e[k];
      out.emplace_back(seg[0], seg[1]);
    }
  return out;
}

}  // namespace cci

#endif  // CCI_GRID_HPP_
