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

#include "terramob/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

#include <fmt/format.h>

namespace terramob::planner {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.41421356237309504880;

struct OpenEntry {
  double f;
  double g;
  std::size_t index;
};

// Pops the smallest f; ties go to the larger g, then to the smaller
// row-major index, which is the lexicographic (row, col) order.
struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.index > b.index;
  }
};

void require_endpoint(const ElevationGrid& grid, CellIndex c, const char* what) {
  if (!grid.traversable(c)) {
    throw_invalid(fmt::format("{} ({}, {}) is not a traversable cell", what, c.row, c.col));
  }
}

}  // namespace

double quantize_up(double v) { return std::ceil(v / kCostQuantum) * kCostQuantum; }
double quantize_down(double v) { return std::floor(v / kCostQuantum) * kCostQuantum; }

std::optional<double> edge_cost(const ElevationGrid& grid, const agents::AgentProfile& p, CellIndex a,
                                CellIndex b, CostMode mode) {
  const auto t = agents::traversal_time(p, grid, a, b);
  if (!t) return std::nullopt;
  return quantize_up(mode == CostMode::kTime ? *t : grid.run(a, b));
}

double heuristic(CellIndex c, CellIndex goal, const agents::AgentProfile& p, double cellsize, CostMode mode) {
  const int dr = std::abs(c.row - goal.row);
  const int dc = std::abs(c.col - goal.col);
  const int diag = std::min(dr, dc);
  const int straight = std::max(dr, dc) - diag;
  // Per-move lower bounds are quantized first so the sum stays exact and the
  // heuristic is consistent with the quantized edge weights.
  const double per_straight = quantize_down(mode == CostMode::kTime ? cellsize / p.s_flat : cellsize);
  const double per_diag =
      quantize_down(mode == CostMode::kTime ? cellsize * kSqrt2 / p.s_flat : cellsize * kSqrt2);
  return diag * per_diag + straight * per_straight;
}

PlanResult astar(const ElevationGrid& grid, const agents::AgentProfile& p, CellIndex start, CellIndex goal,
                 CostMode mode) {
  require_endpoint(grid, start, "start");
  require_endpoint(grid, goal, "goal");
  const auto t0 = std::chrono::steady_clock::now();

  PlanResult result;
  const std::size_t n = grid.size();
  std::vector<double> g(n, kInf);
  std::vector<std::size_t> parent(n, n);
  std::vector<std::uint8_t> closed(n, 0);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;

  const std::size_t s = grid.flat(start);
  const std::size_t gi = grid.flat(goal);
  g[s] = 0.0;
  open.push({heuristic(start, goal, p, grid.cellsize(), mode), 0.0, s});
  result.stats.open_peak = 1;

  bool found = false;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (closed[top.index] || top.g != g[top.index]) continue;
    closed[top.index] = 1;
    ++result.stats.nodes_expanded;
    if (top.index == gi) {
      found = true;
      break;
    }
    const CellIndex u = grid.unflat(top.index);
    for (const CellIndex v : terrain::neighbors(grid, u)) {
      const std::size_t vi = grid.flat(v);
      if (closed[vi]) continue;
      const auto w = edge_cost(grid, p, u, v, mode);
      if (!w) continue;
      const double cand = top.g + *w;
      if (cand < g[vi]) {
        g[vi] = cand;
        parent[vi] = top.index;
        open.push({cand + heuristic(v, goal, p, grid.cellsize(), mode), cand, vi});
        result.stats.open_peak = std::max<std::uint64_t>(result.stats.open_peak, open.size());
      }
    }
  }

  if (found) {
    std::vector<CellIndex> cells;
    for (std::size_t i = gi; i != n; i = parent[i]) cells.push_back(grid.unflat(i));
    std::reverse(cells.begin(), cells.end());
    result.plan = make_plan(grid, p, std::move(cells));
  }
  result.stats.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::vector<double> dijkstra_all(const ElevationGrid& grid, const agents::AgentProfile& p, CellIndex source,
                                 CostMode mode) {
  require_endpoint(grid, source, "source");
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::vector<double> dist(grid.size(), kInf);
  dist[grid.flat(source)] = 0.0;
  queue.push({0.0, grid.flat(source)});
  while (!queue.empty()) {
    const auto [d, i] = queue.top();
    queue.pop();
    if (d != dist[i]) continue;
    const CellIndex u = grid.unflat(i);
    for (const CellIndex v : terrain::neighbors(grid, u)) {
      const auto w = edge_cost(grid, p, u, v, mode);
      if (!w) continue;
      const std::size_t vi = grid.flat(v);
      if (d + *w < dist[vi]) {
        dist[vi] = d + *w;
        queue.push({dist[vi], vi});
      }
    }
  }
  return dist;
}

std::optional<double> dijkstra_oracle(const ElevationGrid& grid, const agents::AgentProfile& p,
                                      CellIndex start, CellIndex goal, CostMode mode) {
  require_endpoint(grid, goal, "goal");
  const double d = dijkstra_all(grid, p, start, mode)[grid.flat(goal)];
  if (d == kInf) return std::nullopt;
  return d;
}

std::optional<double> local_step_cost(const ElevationGrid& grid, const agents::AgentProfile& p, CellIndex at,
                                      terrain::Direction action) {
  const CellIndex to = terrain::step(at, action);
  if (!grid.in_bounds(at) || !grid.in_bounds(to)) throw_invalid("local_step_cost: move leaves the grid");
  return agents::traversal_time(p, grid, at, to);
}

PathPlan make_plan(const ElevationGrid& grid, const agents::AgentProfile& p, std::vector<CellIndex> cells) {
  if (cells.empty()) throw_invalid("make_plan: empty cell sequence");
  PathPlan plan;
  plan.profile_name = p.name;
  if (!grid.traversable(cells.front())) throw_invalid("make_plan: first cell is not traversable");
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const CellIndex a = cells[i - 1], b = cells[i];
    if (!grid.in_bounds(b) || terrain::chebyshev(a, b) != 1) {
      throw_invalid(fmt::format("make_plan: cells {} and {} are not adjacent", i - 1, i));
    }
    const auto t = edge_cost(grid, p, a, b, CostMode::kTime);
    if (!t) throw_invalid(fmt::format("make_plan: edge {} -> {} is impassable", i - 1, i));
    plan.edge_times.push_back(*t);
    plan.total_time += *t;
    plan.total_distance += grid.run(a, b);
  }
  plan.waypoints = std::move(cells);
  return plan;
}

std::string validate_plan(const ElevationGrid& grid, const agents::AgentProfile& p, const PathPlan& plan) {
  if (plan.waypoints.empty()) return "plan has no waypoints";
  if (plan.edge_times.size() + 1 != plan.waypoints.size()) return "edge_times size mismatch";
  double time = 0.0, dist = 0.0;
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    const CellIndex b = plan.waypoints[i];
    if (!grid.traversable(b)) return fmt::format("waypoint {} is not traversable", i);
    if (i == 0) continue;
    const CellIndex a = plan.waypoints[i - 1];
    if (terrain::chebyshev(a, b) != 1) return fmt::format("waypoints {} and {} are not adjacent", i - 1, i);
    const auto s = terrain::slope_percent(grid, a, b);
    if (agents::effective_slope(p, s) > p.max_slope) return fmt::format("edge into waypoint {} exceeds max_slope", i);
    time += plan.edge_times[i - 1];
    dist += grid.run(a, b);
  }
  if (time != plan.total_time) return "total_time != sum(edge_times)";
  if (std::abs(dist - plan.total_distance) > 1e-9 * std::max(1.0, dist)) return "total_distance mismatch";
  return {};
}

void write_plan_csv(std::ostream& out, const ElevationGrid& grid, const PathPlan& plan) {
  out << "index,row,col,easting,northing,elevation,edge_time_s,cum_time_s\n";
  double cum = 0.0;
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    const CellIndex c = plan.waypoints[i];
    const double edge = i == 0 ? 0.0 : plan.edge_times[i - 1];
    cum += edge;
    out << fmt::format("{},{},{},{:.3f},{:.3f},{:.3f},{:.6f},{:.6f}\n", i, c.row, c.col, grid.easting(c),
                       grid.northing(c), grid.elevation(c), edge, cum);
  }
}

}  // namespace terramob::planner
