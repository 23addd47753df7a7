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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "terramob/agents.hpp"
#include "terramob/terrain.hpp"

namespace terramob::planner {

using terrain::CellIndex;
using terrain::ElevationGrid;

enum class CostMode {
  kTime,      // seconds, the default
  kDistance,  // meters, impassability still follows the profile
};

// Search costs are rounded up to multiples of this quantum (2^-20) so that
// path sums are exact in double precision and independent of summation
// order. Heuristic values are rounded down, which keeps them consistent.
inline constexpr double kCostQuantum = 1.0 / 1048576.0;
double quantize_up(double v);
double quantize_down(double v);

struct PathPlan {
  std::vector<CellIndex> waypoints;
  std::vector<double> edge_times;  // seconds, one per consecutive pair
  double total_time = 0.0;
  double total_distance = 0.0;
  std::string profile_name;

  std::size_t size() const noexcept { return waypoints.size(); }
  bool empty() const noexcept { return waypoints.empty(); }
};

struct SearchStats {
  std::uint64_t nodes_expanded = 0;
  std::uint64_t open_peak = 0;
  double wall_time = 0.0;  // seconds
};

struct PlanResult {
  std::optional<PathPlan> plan;  // nullopt: goal unreachable
  SearchStats stats;
};

// Edge weight used by the searches (already quantized); nullopt when impassable.
std::optional<double> edge_cost(const ElevationGrid& grid, const agents::AgentProfile& p, CellIndex a,
                                CellIndex b, CostMode mode = CostMode::kTime);

// Octile distance to goal divided by s_flat (time mode) or in meters
// (distance mode), rounded down to the cost quantum.
double heuristic(CellIndex c, CellIndex goal, const agents::AgentProfile& p, double cellsize,
                 CostMode mode = CostMode::kTime);

// Least-cost grid path. Equal f values prefer larger g, then the smaller
// (row, col). Throws Error(kInvalidArgument) when start or goal is not a
// traversable in-bounds cell.
PlanResult astar(const ElevationGrid& grid, const agents::AgentProfile& p, CellIndex start, CellIndex goal,
                 CostMode mode = CostMode::kTime);

// Uniform-cost search over the same edge weights; used as the optimality oracle.
std::optional<double> dijkstra_oracle(const ElevationGrid& grid, const agents::AgentProfile& p,
                                      CellIndex start, CellIndex goal, CostMode mode = CostMode::kTime);

// Single-source costs from `source` to every cell (infinity when unreachable).
std::vector<double> dijkstra_all(const ElevationGrid& grid, const agents::AgentProfile& p, CellIndex source,
                                 CostMode mode = CostMode::kTime);

// The c_A* term of the hierarchical policy: time to take one grid move.
// nullopt when the move is impassable; throws when it leaves the grid.
std::optional<double> local_step_cost(const ElevationGrid& grid, const agents::AgentProfile& p, CellIndex at,
                                      terrain::Direction action);

// Builds a plan from an explicit cell sequence (consecutive cells adjacent
// and passable). Throws Error(kInvalidArgument) otherwise.
PathPlan make_plan(const ElevationGrid& grid, const agents::AgentProfile& p, std::vector<CellIndex> cells);

// Checks every PathPlan invariant; returns an empty string when valid.
std::string validate_plan(const ElevationGrid& grid, const agents::AgentProfile& p, const PathPlan& plan);

// CSV: index,row,col,easting,northing,elevation,edge_time_s,cum_time_s
void write_plan_csv(std::ostream& out, const ElevationGrid& grid, const PathPlan& plan);

}  // namespace terramob::planner
