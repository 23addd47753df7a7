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
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "terramob/agents.hpp"
#include "terramob/local_adapt.hpp"
#include "terramob/planner.hpp"
#include "terramob/terrain.hpp"

namespace terramob::sim {

using terrain::CellIndex;
using terrain::ElevationGrid;

enum class Mode { kFollowing, kAdapting, kArrived, kIntercepted, kAbandoned, kNoPath };
const char* mode_name(Mode m);
inline bool is_terminal(Mode m) { return m != Mode::kFollowing && m != Mode::kAdapting; }

// Footprint that blocks its cells while the clock lies in one of the
// half-open [appear, disappear) intervals. An empty schedule means always.
struct Obstacle {
  std::string id;
  std::vector<CellIndex> footprint;
  std::vector<std::pair<double, double>> schedule;

  bool active_at(double t) const;
  bool covers(CellIndex c) const;
};
// Intervals must be ordered, non-overlapping and non-empty; cells in bounds.
void validate(const Obstacle& o, const ElevationGrid& grid);

struct PursuitRule {
  std::size_t pursuer = 0;
  std::size_t target = 0;
  double los_loss_limit = 120.0;  // seconds
  double effort_budget = 1e9;     // effort units
  double capture_radius = 5.0;    // meters
};

enum class PursuitStatus { kActive, kInterception, kAbandonedLos, kAbandonedEffort };
const char* pursuit_status_name(PursuitStatus s);

struct PursuitState {
  PursuitRule rule;
  PursuitStatus status = PursuitStatus::kActive;
  double end_time = 0.0;
  double los_lost_for = 0.0;  // consecutive seconds without line of sight
  std::optional<CellIndex> last_seen;
  std::size_t splices = 0;
};

// Effort for moving `seconds` along an edge of the given effective slope.
double effort_accrual(double seconds, double slope_percent);

struct TraceRecord {
  double t = 0.0;
  CellIndex cell;
  double easting = 0.0;
  double northing = 0.0;
  double elevation = 0.0;
  Mode mode = Mode::kFollowing;
  bool chi = false;
  std::string action;
  double speed = 0.0;  // displacement over the step / dt
  int deviation = 0;   // d_t, cells
  double effort = 0.0;
};

// CSV: t_s,row,col,easting,northing,elevation_m,mode,chi,action,speed_mps,d_t_cells,effort
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);

struct AgentSpec {
  std::string id;
  agents::AgentProfile profile;
  CellIndex start;
  CellIndex goal;
  std::shared_ptr<const local_adapt::QTable> qtable;  // required for local bypass
};

struct AgentState {
  AgentSpec spec;
  std::optional<planner::PathPlan> plan;
  planner::SearchStats search;
  std::size_t waypoint_index = 0;  // index of the next plan cell p_t
  Mode mode = Mode::kFollowing;
  std::string outcome;

  CellIndex cell;                    // last cell center reached
  std::optional<CellIndex> edge_to;  // set while moving between cell centers
  double edge_duration = 0.0;        // seconds for the current edge
  double edge_elapsed = 0.0;         // seconds already spent on it
  double edge_slope = 0.0;           // effective slope percent of the current edge

  bool chi = false;
  std::string last_action = "stay";
  bool cleared = false;

  double effort = 0.0;
  double distance = 0.0;     // meters, completed edges
  double route_time = 0.0;   // seconds, sum of completed edge durations
  double moving_time = 0.0;  // seconds spent on edges, partial ones included
  double delay_time = 0.0;   // seconds spent waiting or yielding
  double arrival_time = -1.0;
  int collisions = 0;        // infeasible choices replaced by stay
  int astar_calls = 0;
  std::vector<TraceRecord> trace;

  bool active() const { return !is_terminal(mode); }
  // Heading cell: the edge destination while moving, else the current cell.
  CellIndex heading() const { return edge_to ? *edge_to : cell; }
};

struct WorldOptions {
  double dt = 1.0;
  planner::CostMode cost_mode = planner::CostMode::kTime;
  double eye_height = terrain::kDefaultEyeHeight;
  std::uint64_t seed = 0;
};

class World {
 public:
  World(ElevationGrid grid, WorldOptions options);

  // Plans the agent's route (the only global search it ever gets) and places it.
  std::size_t add_agent(AgentSpec spec);
  void add_obstacle(Obstacle o);
  void add_pursuit(const PursuitRule& rule);

  // Advances the clock by dt: agents move in id order, then pursuits update.
  void step();
  void run(double max_time);
  bool finished() const;

  double clock() const { return clock_; }
  const ElevationGrid& grid() const { return grid_; }
  const WorldOptions& options() const { return options_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  const AgentState& agent(std::size_t i) const { return agents_.at(i); }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  const std::vector<PursuitState>& pursuits() const { return pursuits_; }

  // Map position of an agent (interpolated along its current edge).
  std::pair<double, double> position(const AgentState& a) const;
  CellIndex occupied_cell(const AgentState& a) const;
  // Dynamic blocking as seen by agent `self`: active obstacle cells, other
  // active agents' bodies and their edge destinations.
  bool blocked_for(std::size_t self, CellIndex c) const;
  int deviation(const AgentState& a) const;

 private:
  void move_agent(std::size_t i);
  void begin_edge(AgentState& a, CellIndex to);
  void arrive_at_cell(AgentState& a, double at_time);
  void update_pursuit(PursuitState& p);
  void splice_toward(AgentState& a, CellIndex target);
  void record(AgentState& a, double t, double speed);
  bool ignores(std::size_t self, std::size_t other) const;

  ElevationGrid grid_;
  WorldOptions options_;
  double clock_ = 0.0;
  std::vector<AgentState> agents_;
  std::vector<Obstacle> obstacles_;
  std::vector<PursuitState> pursuits_;
};

// Final per-agent numbers.
struct AgentSummary {
  std::string id;
  std::string profile;
  std::string outcome;
  double duration = 0.0;  // arrival clock - start clock; -1 when the agent never arrived
  double distance = 0.0;
  double effort = 0.0;
  double avg_speed = 0.0;
  double plan_time = 0.0;
  double plan_distance = 0.0;
  int astar_calls = 0;
  std::uint64_t nodes_expanded = 0;
};
AgentSummary summarize(const World& w, std::size_t i);

// Cart-versus-mule style comparison of two runs over the same endpoints.
struct TransportRow {
  std::string route;
  std::string slow_mode;
  std::string fast_mode;
  double slow_duration = 0.0;
  double slow_distance = 0.0;
  double fast_duration = 0.0;
  double fast_distance = 0.0;
  double difference = 0.0;           // seconds
  double reduction_percent = 0.0;    // (slow - fast) / slow * 100
  double distance_reduction_percent = 0.0;
  std::string note;                  // set when a mode has no route
};
TransportRow make_transport_row(const std::string& route, const AgentSummary& slow, const AgentSummary& fast);

// Runs each profile alone on the terrain (same obstacles, options and local
// policy) and compares durations. The first profile is the reference.
struct TransportRun {
  TransportRow row;
  AgentSummary first;
  AgentSummary second;
  std::vector<TraceRecord> first_trace;
  std::vector<TraceRecord> second_trace;
};
TransportRun compare_transport(const ElevationGrid& grid, const WorldOptions& options,
                               const std::vector<Obstacle>& obstacles, const AgentSpec& first,
                               const AgentSpec& second, double max_time, const std::string& route);

}  // namespace terramob::sim
