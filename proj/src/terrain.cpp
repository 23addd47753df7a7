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

#include "terramob/terrain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace terramob::terrain {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::optional<double> parse_real(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::optional<Direction> direction_between(CellIndex a, CellIndex b) {
  for (int d = 0; d < kDirectionCount; ++d) {
    if (step(a, static_cast<Direction>(d)) == b) return static_cast<Direction>(d);
  }
  return std::nullopt;
}

const char* direction_name(Direction d) {
  static constexpr const char* kNames[] = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
  return kNames[static_cast<int>(d)];
}

int chebyshev(CellIndex a, CellIndex b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
}

double octile(CellIndex a, CellIndex b) {
  const int dr = std::abs(a.row - b.row);
  const int dc = std::abs(a.col - b.col);
  const int diag = std::min(dr, dc);
  const int straight = std::max(dr, dc) - diag;
  return diag * kSqrt2 + straight;
}

// ---------------------------------------------------------------------------

ElevationGrid::ElevationGrid(int ncols, int nrows, double xll, double yll, double cellsize,
                             double nodata, std::vector<double> values, bool has_nodata_header)
    : ncols_(ncols),
      nrows_(nrows),
      xll_(xll),
      yll_(yll),
      cellsize_(cellsize),
      nodata_(nodata),
      has_nodata_header_(has_nodata_header),
      values_(std::move(values)) {
  if (ncols <= 0 || nrows <= 0) throw_invalid("grid dimensions must be positive");
  if (!(cellsize > 0.0) || !std::isfinite(cellsize)) throw_invalid("cellsize must be positive");
  if (values_.size() != static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows)) {
    throw_invalid("value count does not match nrows x ncols");
  }
  for (double v : values_) {
    if (v != nodata_ && !std::isfinite(v)) throw_invalid("non-finite elevation");
  }
}

bool ElevationGrid::is_nodata(CellIndex c) const noexcept {
  if (!in_bounds(c)) return true;
  return values_[flat(c)] == nodata_;
}

std::optional<CellIndex> ElevationGrid::cell_at(double e, double n) const noexcept {
  const double fx = std::floor((e - xll_) / cellsize_);
  const double fy = std::floor((n - yll_) / cellsize_);
  if (!std::isfinite(fx) || !std::isfinite(fy)) return std::nullopt;
  const CellIndex c{nrows_ - 1 - static_cast<int>(fy), static_cast<int>(fx)};
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

double ElevationGrid::run(CellIndex a, CellIndex b) const noexcept {
  if (a == b) return 0.0;
  return (a.row != b.row && a.col != b.col) ? cellsize_ * kSqrt2 : cellsize_;
}

// ---------------------------------------------------------------------------
// ASCII grid IO

ElevationGrid parse_ascii_grid(std::istream& in) {
  std::optional<int> ncols, nrows;
  std::optional<double> xll, yll, cellsize, nodata;
  bool x_center = false, y_center = false;

  std::string line;
  int line_no = 0;
  std::vector<double> values;
  bool in_data = false;
  std::size_t expected = 0;

  auto parse_int = [&](std::string_view tok, const char* key) {
    const auto v = parse_real(tok);
    if (!v || *v != std::floor(*v) || *v < 1 || *v > 1e8) {
      throw ParseError(line_no, std::string(key) + " must be a positive integer");
    }
    return static_cast<int>(*v);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    if (!in_data) {
      const char first = tokens[0].front();
      const bool numeric = std::isdigit(static_cast<unsigned char>(first)) || first == '-' ||
                           first == '+' || first == '.';
      if (!numeric) {
        if (tokens.size() != 2) throw ParseError(line_no, "header line must be 'key value'");
        const std::string key = lower(tokens[0]);
        const auto value = parse_real(tokens[1]);
        if (!value) throw ParseError(line_no, "non-numeric header value '" + std::string(tokens[1]) + "'");
        if (key == "ncols") {
          ncols = parse_int(tokens[1], "ncols");
        } else if (key == "nrows") {
          nrows = parse_int(tokens[1], "nrows");
        } else if (key == "xllcorner" || key == "xllcenter") {
          xll = *value;
          x_center = key == "xllcenter";
        } else if (key == "yllcorner" || key == "yllcenter") {
          yll = *value;
          y_center = key == "yllcenter";
        } else if (key == "cellsize") {
          if (!(*value > 0.0) || !std::isfinite(*value)) {
            throw ParseError(line_no, "cellsize must be positive");
          }
          cellsize = *value;
        } else if (key == "nodata_value") {
          nodata = *value;
        } else {
          throw ParseError(line_no, "malformed header key '" + std::string(tokens[0]) + "'");
        }
        continue;
      }
      if (!ncols || !nrows || !xll || !yll || !cellsize) {
        throw ParseError(line_no, "incomplete header (need ncols, nrows, xllcorner, yllcorner, cellsize)");
      }
      in_data = true;
      expected = static_cast<std::size_t>(*ncols) * static_cast<std::size_t>(*nrows);
      values.reserve(expected);
    }

    for (const auto tok : tokens) {
      const auto v = parse_real(tok);
      if (!v) throw ParseError(line_no, "non-numeric token '" + std::string(tok) + "'");
      if (!std::isfinite(*v)) throw ParseError(line_no, "non-finite value '" + std::string(tok) + "'");
      if (values.size() == expected) {
        throw ParseError(line_no, "value count mismatch: more than " + std::to_string(expected) + " values");
      }
      values.push_back(*v);
    }
  }

  if (!in_data) {
    if (!ncols || !nrows || !xll || !yll || !cellsize) {
      throw ParseError(line_no, "incomplete header (need ncols, nrows, xllcorner, yllcorner, cellsize)");
    }
    expected = static_cast<std::size_t>(*ncols) * static_cast<std::size_t>(*nrows);
  }
  if (values.size() != expected) {
    throw ParseError(line_no, "value count mismatch: expected " + std::to_string(expected) + ", got " +
                                  std::to_string(values.size()));
  }

  double x = *xll, y = *yll;
  if (x_center) x -= *cellsize / 2.0;
  if (y_center) y -= *cellsize / 2.0;
  return ElevationGrid(*ncols, *nrows, x, y, *cellsize, nodata.value_or(-9999.0), std::move(values),
                       nodata.has_value());
}

ElevationGrid load_ascii_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return parse_ascii_grid(in);
}

void write_ascii_grid(std::ostream& out, const ElevationGrid& grid) {
  out << "ncols " << grid.ncols() << '\n'
      << "nrows " << grid.nrows() << '\n'
      << "xllcorner " << format_real(grid.xll()) << '\n'
      << "yllcorner " << format_real(grid.yll()) << '\n'
      << "cellsize " << format_real(grid.cellsize()) << '\n';
  if (grid.has_nodata_header()) out << "NODATA_value " << format_real(grid.nodata()) << '\n';
  const auto& v = grid.values();
  for (int r = 0; r < grid.nrows(); ++r) {
    for (int c = 0; c < grid.ncols(); ++c) {
      if (c) out << ' ';
      out << format_real(v[grid.flat({r, c})]);
    }
    out << '\n';
  }
}

std::string to_ascii_grid(const ElevationGrid& grid) {
  std::ostringstream os;
  write_ascii_grid(os, grid);
  return os.str();
}

// ---------------------------------------------------------------------------
// Slope, sight lines

SlopeSample slope_percent(const ElevationGrid& grid, CellIndex a, CellIndex b) {
  if (!grid.in_bounds(a) || !grid.in_bounds(b) || chebyshev(a, b) != 1) {
    throw_invalid("slope_percent: cells are not adjacent");
  }
  if (grid.is_nodata(a) || grid.is_nodata(b)) throw_invalid("slope_percent: nodata endpoint");
  SlopeSample s;
  s.rise = grid.elevation(b) - grid.elevation(a);
  s.run = grid.run(a, b);
  s.percent = std::abs(s.rise) / s.run * 100.0;
  return s;
}

std::vector<CellIndex> supercover_line(CellIndex a, CellIndex b) {
  const bool swapped = b < a;
  if (swapped) std::swap(a, b);

  std::vector<CellIndex> cells;
  const std::int64_t dx = b.col - a.col;
  const std::int64_t dy = b.row - a.row;
  const std::int64_t nx = std::abs(dx);
  const std::int64_t ny = std::abs(dy);
  const int sx = dx > 0 ? 1 : -1;
  const int sy = dy > 0 ? 1 : -1;

  CellIndex p = a;
  cells.push_back(p);
  std::int64_t ix = 0, iy = 0;
  while (ix < nx || iy < ny) {
    // Compare the segment parameters of the next vertical and horizontal
    // cell-boundary crossings: (0.5 + ix) / nx vs (0.5 + iy) / ny.
    const std::int64_t decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
    if (decision == 0) {
      cells.push_back({p.row, p.col + sx});
      cells.push_back({p.row + sy, p.col});
      p.col += sx;
      p.row += sy;
      ++ix;
      ++iy;
    } else if (decision < 0) {
      p.col += sx;
      ++ix;
    } else {
      p.row += sy;
      ++iy;
    }
    cells.push_back(p);
  }
  if (swapped) std::reverse(cells.begin(), cells.end());
  return cells;
}

bool line_of_sight(const ElevationGrid& grid, CellIndex a, CellIndex b, double observer_height,
                   double target_height) {
  if (!grid.traversable(a) || !grid.traversable(b)) {
    throw_invalid("line_of_sight: endpoints must be traversable cells");
  }
  if (a == b) return true;
  // Evaluate in canonical endpoint order so LOS(a,b,h1,h2) == LOS(b,a,h2,h1) exactly.
  if (b < a) {
    std::swap(a, b);
    std::swap(observer_height, target_height);
  }
  const double za = grid.elevation(a) + observer_height;
  const double zb = grid.elevation(b) + target_height;
  const double dx = b.col - a.col;
  const double dy = b.row - a.row;
  const double len2 = dx * dx + dy * dy;

  for (const CellIndex c : supercover_line(a, b)) {
    if (c == a || c == b) continue;
    if (grid.is_nodata(c)) return false;
    double t = ((c.col - a.col) * dx + (c.row - a.row) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const double sight = za + t * (zb - za);
    if (grid.elevation(c) > sight) return false;
  }
  return true;
}

std::size_t VisibilityMask::count() const {
  return static_cast<std::size_t>(std::count(visible.begin(), visible.end(), std::uint8_t{1}));
}

VisibilityMask viewshed(const ElevationGrid& grid, CellIndex origin, double radius,
                        double observer_height, double target_height) {
  if (!grid.traversable(origin)) throw_invalid("viewshed: origin must be a traversable cell");
  if (!(radius > 0.0)) throw_invalid("viewshed: radius must be positive");
  VisibilityMask mask{grid.nrows(), grid.ncols(), std::vector<std::uint8_t>(grid.size(), 0)};
  const double cs = grid.cellsize();
  for (int r = 0; r < grid.nrows(); ++r) {
    for (int c = 0; c < grid.ncols(); ++c) {
      const CellIndex cell{r, c};
      const double dr = (r - origin.row) * cs;
      const double dc = (c - origin.col) * cs;
      if (std::sqrt(dr * dr + dc * dc) > radius) continue;
      if (grid.is_nodata(cell)) continue;
      if (line_of_sight(grid, origin, cell, observer_height, target_height)) {
        mask.visible[grid.flat(cell)] = 1;
      }
    }
  }
  return mask;
}

void write_mask_pgm(std::ostream& out, const VisibilityMask& mask) {
  out << "P2\n" << mask.ncols << ' ' << mask.nrows << "\n1\n";
  for (int r = 0; r < mask.nrows; ++r) {
    for (int c = 0; c < mask.ncols; ++c) {
      if (c) out << ' ';
      out << (mask.at({r, c}) ? '1' : '0');
    }
    out << '\n';
  }
}

void write_mask_csv(std::ostream& out, const VisibilityMask& mask) {
  out << "row,col,visible\n";
  for (int r = 0; r < mask.nrows; ++r) {
    for (int c = 0; c < mask.ncols; ++c) out << r << ',' << c << ',' << (mask.at({r, c}) ? 1 : 0) << '\n';
  }
}

std::vector<CellIndex> neighbors(const ElevationGrid& grid, CellIndex c) {
  std::vector<CellIndex> out;
  out.reserve(kDirectionCount);
  for (int d = 0; d < kDirectionCount; ++d) {
    const auto dir = static_cast<Direction>(d);
    const CellIndex n = step(c, dir);
    if (!grid.traversable(n)) continue;
    if (is_diagonal(dir)) {
      const auto o = kOffsets[d];
      const bool side_a = grid.is_nodata({c.row + o.drow, c.col});
      const bool side_b = grid.is_nodata({c.row, c.col + o.dcol});
      if (side_a && side_b) continue;
    }
    out.push_back(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic terrain

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw_invalid(std::string("terrain recipe: ") + what);
}

constexpr double kNoData = -9999.0;

SyntheticTerrain two_corridor(const TerrainRecipe& rc) {
  require(rc.gentle_slope >= 0.0 && rc.steep_slope > rc.gentle_slope && rc.steep_slope <= 1000.0,
          "two_corridor needs 0 <= gentle_slope < steep_slope <= 1000");
  require(rc.corridor_length >= 4 && rc.corridor_length <= 100000, "corridor_length must be >= 4");
  require(rc.detour_depth >= 4 && rc.detour_depth <= 100000, "detour_depth must be >= 4");

  // Layout (3-cell-wide corridors, nodata elsewhere):
  //   rows 1..3                 steep corridor, start block at cols 1..3, goal block at L+1..L+3
  //   cols 1..3 / L+1..L+3      vertical legs of the gentle corridor, level with the start/goal
  //   rows D+1..D+3             bottom leg of the gentle corridor
  // Both corridors rise to a crest at mid-length and fall back to base level.
  const int len = rc.corridor_length;
  const int depth = rc.detour_depth;
  const int nrows = depth + 5;
  const int ncols = len + 5;
  const double cs = rc.cellsize;
  std::vector<double> v(static_cast<std::size_t>(nrows) * ncols, kNoData);
  auto at = [&](int r, int c) -> double& { return v[static_cast<std::size_t>(r) * ncols + c]; };
  auto hill = [&](int c, double slope) {
    const int lo = 3, hi = len + 1;
    if (c <= lo || c >= hi) return 0.0;
    return std::min(c - lo, hi - c) * cs * slope / 100.0;
  };

  for (int r = 1; r <= depth + 3; ++r) {
    for (int c = 1; c <= 3; ++c) at(r, c) = 0.0;
    for (int c = len + 1; c <= len + 3; ++c) at(r, c) = 0.0;
  }
  for (int c = 4; c <= len; ++c) {
    for (int r = 1; r <= 3; ++r) at(r, c) = hill(c, rc.steep_slope);
    for (int r = depth + 1; r <= depth + 3; ++r) at(r, c) = hill(c, rc.gentle_slope);
  }
  return {ElevationGrid(ncols, nrows, rc.xll, rc.yll, cs, kNoData, std::move(v)), CellIndex{2, 2},
          CellIndex{2, len + 2}};
}

}  // namespace

SyntheticTerrain make_synthetic(const TerrainRecipe& rc) {
  require(rc.cellsize > 0.0 && std::isfinite(rc.cellsize), "cellsize must be positive");
  if (rc.kind == RecipeKind::kTwoCorridor) return two_corridor(rc);

  require(rc.nrows > 0 && rc.ncols > 0 && static_cast<long long>(rc.nrows) * rc.ncols <= 50'000'000LL,
          "grid dimensions out of range");
  const int nrows = rc.nrows, ncols = rc.ncols;
  std::vector<double> v(static_cast<std::size_t>(nrows) * ncols, 0.0);
  auto at = [&](int r, int c) -> double& { return v[static_cast<std::size_t>(r) * ncols + c]; };

  switch (rc.kind) {
    case RecipeKind::kFlat:
      require(std::isfinite(rc.height), "flat height must be finite");
      std::fill(v.begin(), v.end(), rc.height);
      break;
    case RecipeKind::kRamp: {
      require(rc.slope_percent >= 0.0 && rc.slope_percent <= 1000.0, "ramp slope must be in [0, 1000]");
      require(rc.axis == 'x' || rc.axis == 'y', "ramp axis must be x or y");
      const double rise = rc.slope_percent / 100.0 * rc.cellsize;
      for (int r = 0; r < nrows; ++r)
        for (int c = 0; c < ncols; ++c) at(r, c) = rise * (rc.axis == 'x' ? c : r);
      break;
    }
    case RecipeKind::kRidge: {
      require(rc.height > 0.0 && std::isfinite(rc.height), "ridge height must be positive");
      require(rc.position >= 0 && rc.position < ncols, "ridge position must be a column of the grid");
      require(rc.half_width > 0.0, "ridge half_width must be positive");
      for (int r = 0; r < nrows; ++r)
        for (int c = 0; c < ncols; ++c)
          at(r, c) = rc.height * std::max(0.0, 1.0 - std::abs(c - rc.position) / rc.half_width);
      break;
    }
    case RecipeKind::kCone: {
      require(std::isfinite(rc.peak), "cone peak must be finite");
      require(rc.radius > 0.0, "cone radius must be positive");
      const int cr = nrows / 2, cc = ncols / 2;
      for (int r = 0; r < nrows; ++r)
        for (int c = 0; c < ncols; ++c) {
          const double d = std::hypot(r - cr, c - cc);
          at(r, c) = rc.peak * std::max(0.0, 1.0 - d / rc.radius);
        }
      break;
    }
    case RecipeKind::kTwoCorridor:
      break;
  }
  return {ElevationGrid(ncols, nrows, rc.xll, rc.yll, rc.cellsize, kNoData, std::move(v)), std::nullopt,
          std::nullopt};
}

}  // namespace terramob::terrain
