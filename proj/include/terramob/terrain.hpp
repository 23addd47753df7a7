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

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "terramob/error.hpp"

namespace terramob::terrain {

inline constexpr double kDefaultEyeHeight = 1.7;

struct CellIndex {
  int row = 0;
  int col = 0;

  friend constexpr auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Grid moves in clockwise order starting north. Row 0 is the northern edge,
// so north is row - 1.
enum class Direction : std::uint8_t { kN = 0, kNE, kE, kSE, kS, kSW, kW, kNW };

inline constexpr int kDirectionCount = 8;

struct Offset {
  int drow;
  int dcol;
};

inline constexpr std::array<Offset, kDirectionCount> kOffsets = {{
    {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1},
}};

constexpr bool is_diagonal(Direction d) { return (static_cast<int>(d) & 1) != 0; }
constexpr CellIndex step(CellIndex c, Direction d) {
  const auto o = kOffsets[static_cast<int>(d)];
  return {c.row + o.drow, c.col + o.dcol};
}
// Direction of an 8-adjacent step a -> b, if any.
std::optional<Direction> direction_between(CellIndex a, CellIndex b);
const char* direction_name(Direction d);

// Chebyshev distance in cells.
int chebyshev(CellIndex a, CellIndex b);
// Octile distance in cell units (diagonal = sqrt 2).
double octile(CellIndex a, CellIndex b);

// Georeferenced elevation raster. Immutable once constructed.
class ElevationGrid {
 public:
  ElevationGrid(int ncols, int nrows, double xll, double yll, double cellsize, double nodata,
                std::vector<double> values, bool has_nodata_header = true);

  int ncols() const noexcept { return ncols_; }
  int nrows() const noexcept { return nrows_; }
  double xll() const noexcept { return xll_; }
  double yll() const noexcept { return yll_; }
  double cellsize() const noexcept { return cellsize_; }
  double nodata() const noexcept { return nodata_; }
  bool has_nodata_header() const noexcept { return has_nodata_header_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool in_bounds(CellIndex c) const noexcept {
    return c.row >= 0 && c.row < nrows_ && c.col >= 0 && c.col < ncols_;
  }
  std::size_t flat(CellIndex c) const noexcept {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(ncols_) +
           static_cast<std::size_t>(c.col);
  }
  CellIndex unflat(std::size_t i) const noexcept {
    return {static_cast<int>(i / static_cast<std::size_t>(ncols_)),
            static_cast<int>(i % static_cast<std::size_t>(ncols_))};
  }
  std::size_t size() const noexcept { return values_.size(); }

  // Unchecked elevation; the caller guarantees in_bounds.
  double elevation(CellIndex c) const noexcept { return values_[flat(c)]; }
  // Out-of-bounds cells are reported as nodata.
  bool is_nodata(CellIndex c) const noexcept;
  bool traversable(CellIndex c) const noexcept { return in_bounds(c) && !is_nodata(c); }

  double easting(CellIndex c) const noexcept { return xll_ + (c.col + 0.5) * cellsize_; }
  double northing(CellIndex c) const noexcept {
    return yll_ + (nrows_ - c.row - 0.5) * cellsize_;
  }
  // Cell containing a map position; nullopt when outside the raster.
  std::optional<CellIndex> cell_at(double easting, double northing) const noexcept;

  // Horizontal run between two adjacent cell centers.
  double run(CellIndex a, CellIndex b) const noexcept;

 private:
  int ncols_;
  int nrows_;
  double xll_;
  double yll_;
  double cellsize_;
  double nodata_;
  bool has_nodata_header_;
  std::vector<double> values_;
};

struct SlopeSample {
  double percent = 0.0;
  double rise = 0.0;
  double run = 0.0;
};

// ESRI ASCII grid. Throws ParseError carrying the offending line number.
ElevationGrid parse_ascii_grid(std::istream& in);
ElevationGrid load_ascii_grid(const std::string& path);
// Writes values with shortest round-trip formatting so parse(write(g)) is exact.
void write_ascii_grid(std::ostream& out, const ElevationGrid& grid);
std::string to_ascii_grid(const ElevationGrid& grid);

// Throws Error(kInvalidArgument) when a, b are not 8-adjacent or either is nodata.
SlopeSample slope_percent(const ElevationGrid& grid, CellIndex a, CellIndex b);

// Cells crossed by the segment between the centers of a and b, both
// endpoints included. Corner crossings include both side cells. The set is
// independent of the traversal direction.
std::vector<CellIndex> supercover_line(CellIndex a, CellIndex b);

bool line_of_sight(const ElevationGrid& grid, CellIndex a, CellIndex b,
                   double observer_height = kDefaultEyeHeight,
                   double target_height = kDefaultEyeHeight);

// Row-major nrows x ncols mask.
struct VisibilityMask {
  int nrows = 0;
  int ncols = 0;
  std::vector<std::uint8_t> visible;

  bool at(CellIndex c) const { return visible[static_cast<std::size_t>(c.row) * ncols + c.col] != 0; }
  std::size_t count() const;
};

VisibilityMask viewshed(const ElevationGrid& grid, CellIndex origin, double radius,
                        double observer_height = kDefaultEyeHeight,
                        double target_height = kDefaultEyeHeight);

// PGM P2 with maxval 1 (0 hidden, 1 visible).
void write_mask_pgm(std::ostream& out, const VisibilityMask& mask);
// One "row,col,visible" record per cell.
void write_mask_csv(std::ostream& out, const VisibilityMask& mask);

// In-bounds, non-nodata 8-neighbours. A diagonal is dropped when both
// orthogonal cells it would cut between are nodata.
std::vector<CellIndex> neighbors(const ElevationGrid& grid, CellIndex c);

// ---------------------------------------------------------------------------
// Synthetic terrain

enum class RecipeKind { kFlat, kRamp, kRidge, kCone, kTwoCorridor };

struct TerrainRecipe {
  RecipeKind kind = RecipeKind::kFlat;
  int nrows = 10;
  int ncols = 10;
  double cellsize = 30.0;
  double xll = 0.0;
  double yll = 0.0;

  double height = 100.0;      // flat: level; ridge: crest height above base
  double slope_percent = 15;  // ramp
  char axis = 'x';            // ramp: 'x' rises with column, 'y' rises with row index
  int position = 5;           // ridge: crest column
  double half_width = 3;      // ridge: cells from crest to foot
  double peak = 100.0;        // cone: summit elevation
  double radius = 5.0;        // cone: base radius in cells
  double gentle_slope = 10;   // two_corridor
  double steep_slope = 25;    // two_corridor
  int corridor_length = 36;   // two_corridor: cells between start and goal
  int detour_depth = 10;      // two_corridor: how far south the gentle corridor runs
};

struct SyntheticTerrain {
  ElevationGrid grid;
  std::optional<CellIndex> start;
  std::optional<CellIndex> goal;
};

// Throws Error(kInvalidArgument) for out-of-range recipe parameters.
SyntheticTerrain make_synthetic(const TerrainRecipe& recipe);

}  // namespace terramob::terrain
