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
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "terramob/agents.hpp"
#include "terramob/planner.hpp"
#include "terramob/terrain.hpp"

namespace terramob::local_adapt {

using terrain::CellIndex;
using terrain::Direction;
using terrain::ElevationGrid;

// Eight grid moves in Direction order, then stay.
enum class Action : std::uint8_t { kN = 0, kNE, kE, kSE, kS, kSW, kW, kNW, kStay };
inline constexpr int kActionCount = 9;

constexpr bool is_move(Action a) { return a != Action::kStay; }
constexpr Direction to_direction(Action a) { return static_cast<Direction>(a); }
constexpr Action to_action(Direction d) { return static_cast<Action>(d); }
const char* action_name(Action a);

// Local navigation context of one agent:
//   occupancy        bit d set when the move in Direction d is not available
//   waypoint_dir     bearing bucket from the agent to the tracked waypoint
//   deviation_bucket min(d_t, 3) with d_t in cells
struct LocalState {
  std::uint8_t occupancy = 0;
  Direction waypoint_dir = Direction::kN;
  std::uint8_t deviation_bucket = 0;

  int code() const noexcept {
    return occupancy | (static_cast<int>(waypoint_dir) << 8) | (deviation_bucket << 11);
  }
  static LocalState from_code(int code);
  bool occupied(Direction d) const noexcept { return (occupancy >> static_cast<int>(d)) & 1U; }

  friend bool operator==(const LocalState&, const LocalState&) = default;
};

inline constexpr int kStateCount = 256 * 8 * 4;

// Bearing bucket of `to` as seen from `from` (from != to).
Direction direction_bucket(CellIndex from, CellIndex to);
inline std::uint8_t deviation_bucket(int cells) { return static_cast<std::uint8_t>(cells < 3 ? cells : 3); }

// The eight symmetries of the square grid (g in [0, 8): bit 2 mirrors east-west,
// bits 0-1 rotate by 90 degree steps). Flat-terrain transitions are invariant
// under them, so training replays every transition through all eight.
inline constexpr int kSymmetryCount = 8;
int transform(Direction d, int g);
LocalState transform(LocalState s, int g);
Action transform(Action a, int g);

// ---------------------------------------------------------------------------

struct QTableInfo {
  double gamma = 0.95;
  double alpha = 0.1;
  std::uint64_t seed = 0;
  int episodes = 0;
};

// Dense action-value table over every (LocalState, Action) pair.
class QTable {
 public:
  QTable();

  double value(LocalState s, Action a) const { return values_[index(s.code(), a)]; }
  double value(int state_code, Action a) const { return values_[index(state_code, a)]; }
  void set(int state_code, Action a, double v) { values_[index(state_code, a)] = v; }
  std::uint32_t visits(LocalState s, Action a) const { return visits_[index(s.code(), a)]; }
  std::span<const double> row(LocalState s) const {
    return {values_.data() + index(s.code(), Action::kN), kActionCount};
  }
  double max_value(LocalState s) const;
  // Stores v at (s, a) and counts the visit.
  void record(LocalState s, Action a, double v) {
    values_[index(s.code(), a)] = v;
    ++visits_[index(s.code(), a)];
  }
  double max_abs() const;
  std::size_t nonzero_count() const;

  QTableInfo info;

  friend bool operator==(const QTable& a, const QTable& b) { return a.values_ == b.values_; }

 private:
  static std::size_t index(int code, Action a) {
    return static_cast<std::size_t>(code) * kActionCount + static_cast<std::size_t>(a);
  }
  std::vector<double> values_;
  std::vector<std::uint32_t> visits_;
};

// Versioned text format, see write_qtable.
void write_qtable(std::ostream& out, const QTable& q);
// Throws ParseError on malformed input.
QTable read_qtable(std::istream& in);
void save_qtable(const std::string& path, const QTable& q);
QTable load_qtable(const std::string& path);

// ---------------------------------------------------------------------------

struct RewardWeights {
  double r_coll = 10.0;
  double r_delay = 0.1;  // per second
  double r_dev = 0.5;    // per cell
  double r_rejoin = 5.0;
  double r_clear = 2.0;
};
// All weights must be finite and non-negative (zero is allowed for ablations).
void validate(const RewardWeights& w);

struct LearningParams {
  double alpha = 0.1;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_episodes = 2000;
  int episodes = 5000;
  int max_steps_per_episode = 40;
  std::uint64_t seed = 42;

  // Linear decay from epsilon_start to epsilon_end, constant afterwards.
  double epsilon_at(int episode) const;
};
void validate(const LearningParams& p);

enum class EventKind { kCollision, kRejoin, kClear, kDeviation, kDelay, kNone };

struct StepEvent {
  EventKind kind = EventKind::kNone;
  double amount = 0.0;  // delay seconds or deviation cells
};

// What happened in one local step; classify() picks the reward case by
// precedence collision > rejoin > clear > deviation > delay > none.
struct StepOutcome {
  bool collided = false;
  bool rejoined = false;
  bool cleared = false;
  int deviation_cells = 0;
  double delay_seconds = 0.0;
};
StepEvent classify(const StepOutcome& o);

// Throws Error(kInvalidArgument) for a negative amount.
double reward(const StepEvent& e, const RewardWeights& w);
const char* event_name(EventKind k);

// Q(s,a) += alpha (r + gamma max_a' Q(s',a') - Q(s,a)); the bootstrap term is
// dropped for terminal transitions. Touches exactly one entry.
void q_update(QTable& q, LocalState s, Action a, double r, LocalState s_next, double alpha, double gamma,
              bool terminal = false);
inline void q_update(QTable& q, LocalState s, Action a, double r, LocalState s_next, const LearningParams& p,
                     bool terminal = false) {
  q_update(q, s, a, r, s_next, p.alpha, p.gamma, terminal);
}

using Rng = std::mt19937_64;
double uniform01(Rng& rng);
std::size_t uniform_index(Rng& rng, std::size_t n);

// Epsilon-greedy. Exploration draws uniformly among stay and the moves whose
// occupancy bit is clear; exploitation is argmax over all actions, lowest
// index on ties.
Action select_action(const QTable& q, LocalState s, double epsilon, Rng& rng);
// Argmax over stay and the unoccupied moves only (evaluation-time choice).
Action greedy_feasible_action(const QTable& q, LocalState s);

// ---------------------------------------------------------------------------
// Geometry shared by training and simulation

// Dynamic blockers (obstacle footprints, other agents) seen by one agent.
using BlockedFn = std::function<bool(CellIndex)>;

struct LocalView {
  const ElevationGrid& grid;
  const agents::AgentProfile& profile;
  BlockedFn blocked;  // may be empty: nothing dynamic

  bool is_blocked(CellIndex c) const { return blocked && blocked(c); }
};

// Move is on-grid, passable for the profile, not blocked, and does not cut a
// corner between two unavailable orthogonal cells.
bool move_available(const LocalView& view, CellIndex at, Direction d);
std::uint8_t occupancy_bits(const LocalView& view, CellIndex at);

// Rejoin target while adapting: first unblocked plan index >= waypoint_index
// within kRejoinLookahead, else the last index of that window.
inline constexpr std::size_t kRejoinLookahead = 16;
// While adapting, the state's waypoint bearing points this many plan cells past
// the rejoin target, which steers around the obstacle instead of into its corner.
inline constexpr std::size_t kTrackingLead = 2;
std::size_t rejoin_target(const LocalView& view, const planner::PathPlan& plan, std::size_t waypoint_index);

// d_t: Chebyshev distance in cells to the nearest plan cell with index >= waypoint_index.
int deviation_cells(const planner::PathPlan& plan, std::size_t waypoint_index, CellIndex at);

LocalState make_state(const LocalView& view, const planner::PathPlan& plan, std::size_t waypoint_index,
                      CellIndex at, bool adapting);

// chi_t: the next plan cell (plan[waypoint_index]) is blocked.
bool detect_block(const LocalView& view, const planner::PathPlan& plan, std::size_t waypoint_index);

struct RejoinResult {
  bool rejoined = false;
  std::size_t waypoint_index = 0;
};
// Forward-only: matches plan cells with index >= waypoint_index.
RejoinResult rejoin_check(CellIndex agent_cell, const planner::PathPlan& plan, std::size_t waypoint_index);

// "clear" condition: the straight segment from the agent to the rejoin target
// no longer touches a blocked cell.
bool bypass_clear(const LocalView& view, const planner::PathPlan& plan, std::size_t waypoint_index,
                  CellIndex at);

// chi == false: the move minimising step cost plus the remaining cost to
// plan[waypoint_index] (exact edge when adjacent, octile bound otherwise).
// chi == true: greedy_feasible_action on the learned table.
Action hierarchical_policy(bool chi, const planner::PathPlan& plan, std::size_t waypoint_index, const QTable& q,
                           LocalState s, const LocalView& view, CellIndex at);

// ---------------------------------------------------------------------------
// Corridor training environment

struct CorridorEnv {
  int size = 15;            // square grid edge, cells
  double cellsize = 30.0;
  int plan_half_length = 5; // plan runs 2 * half_length steps through the centre
  int max_obstacle_extent = 3;
  double clutter_probability = 0.15;  // chance of one extra stray obstacle cell
};
void validate(const CorridorEnv& env);

// One randomized episode setup: a straight plan through the grid centre and
// an obstacle footprint covering the plan cell after the agent.
struct Placement {
  std::vector<CellIndex> plan_cells;
  std::vector<CellIndex> obstacle;
  std::size_t start_index = 0;  // agent sits on plan[start_index], plan[start_index + 1] is blocked
};
Placement sample_placement(const CorridorEnv& env, Rng& rng);
ElevationGrid corridor_grid(const CorridorEnv& env);

struct EpisodeStats {
  double total_return = 0.0;
  bool success = false;
  int steps = 0;
  int collisions = 0;
};

struct CurvePoint {
  int episode = 0;
  double total_return = 0.0;
  bool success = false;
  int steps = 0;
  int collisions = 0;
};

struct TrainResult {
  QTable table;
  std::vector<CurvePoint> curve;
  int total_collisions = 0;
};

TrainResult train_bypass(const CorridorEnv& env, const RewardWeights& w, const LearningParams& p);

struct EvalResult {
  int trials = 0;
  int successes = 0;
  int collisions = 0;
  double success_rate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
};

// Greedy rollouts (exploration off, infeasible moves masked) on fresh placements.
EvalResult evaluate_bypass(const QTable& q, const CorridorEnv& env, const RewardWeights& w, int placements,
                           std::uint64_t seed, int max_steps = 40);

// CSV: episode,return,success,steps
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace terramob::local_adapt
