// Copyright 2026 The terramob Authors
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

// Helpers shared by the test binaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "terramob/terrain.hpp"

namespace testing {

using terramob::terrain::CellIndex;
using terramob::terrain::ElevationGrid;

inline constexpr double kNoData = -9999.0;

// Smooth-ish random relief: a random walk per cell around a base level, with
// an optional share of nodata holes.
inline ElevationGrid random_grid(std::mt19937_64& rng, int nrows, int ncols, double cellsize, double step_m,
                                 double hole_probability = 0.0) {
  std::uniform_real_distribution<double> jitter(-step_m, step_m);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(nrows) * ncols);
  for (int r = 0; r < nrows; ++r) {
    for (int c = 0; c < ncols; ++c) {
      double base = 100.0;
      if (r > 0 && c > 0) base = 0.5 * (v[(r - 1) * ncols + c] + v[r * ncols + c - 1]);
      else if (r > 0) base = v[(r - 1) * ncols + c];
      else if (c > 0) base = v[c - 1];
      v[static_cast<std::size_t>(r) * ncols + c] = base + jitter(rng);
    }
  }
  if (hole_probability > 0.0) {
    for (auto& x : v) {
      if (coin(rng) < hole_probability) x = kNoData;
    }
  }
  return ElevationGrid(ncols, nrows, 0.0, 0.0, cellsize, kNoData, std::move(v));
}

inline ElevationGrid grid_from(int nrows, int ncols, std::vector<double> values, double cellsize = 30.0) {
  return ElevationGrid(ncols, nrows, 0.0, 0.0, cellsize, kNoData, std::move(values));
}

inline ElevationGrid flat_grid(int nrows, int ncols, double cellsize = 30.0, double h = 100.0) {
  return grid_from(nrows, ncols, std::vector<double>(static_cast<std::size_t>(nrows) * ncols, h), cellsize);
}

// Cells whose closed square meets the segment between the centers of a and b.
// Exact integer arithmetic on doubled coordinates.
inline std::set<CellIndex> touched_cells(CellIndex a, CellIndex b) {
  const long long ax = 2LL * a.col, ay = 2LL * a.row, bx = 2LL * b.col, by = 2LL * b.row;
  std::set<CellIndex> out;
  for (int r = std::min(a.row, b.row) - 1; r <= std::max(a.row, b.row) + 1; ++r) {
    for (int c = std::min(a.col, b.col) - 1; c <= std::max(a.col, b.col) + 1; ++c) {
      const long long x0 = 2LL * c - 1, x1 = 2LL * c + 1, y0 = 2LL * r - 1, y1 = 2LL * r + 1;
      if (std::max(ax, bx) < x0 || std::min(ax, bx) > x1 || std::max(ay, by) < y0 || std::min(ay, by) > y1) {
        continue;
      }
      int pos = 0, neg = 0;
      for (const auto& [px, py] : {std::pair{x0, y0}, {x0, y1}, {x1, y0}, {x1, y1}}) {
        const long long cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
        pos += cross > 0;
        neg += cross < 0;
      }
      if (pos == 4 || neg == 4) continue;
      out.insert({r, c});
    }
  }
  return out;
}

// Reference sight test over touched_cells with the sight height taken at the
// projection of each cell center onto the segment.
inline bool reference_los(const ElevationGrid& g, CellIndex a, CellIndex b, double h) {
  if (a == b) return true;
  if (b < a) std::swap(a, b);
  const double za = g.elevation(a) + h, zb = g.elevation(b) + h;
  const double dx = b.col - a.col, dy = b.row - a.row;
  for (const auto c : touched_cells(a, b)) {
    if (c == a || c == b) continue;
    if (g.is_nodata(c)) return false;
    const double t = std::clamp(((c.col - a.col) * dx + (c.row - a.row) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
    if (g.elevation(c) > za + t * (zb - za)) return false;
  }
  return true;
}

}  // namespace testing
