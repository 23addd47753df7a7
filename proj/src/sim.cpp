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

#include "terramob/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "terramob/error.hpp"

namespace terramob::sim {

using local_adapt::Action;
using local_adapt::LocalView;

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::kFollowing: return "following";
    case Mode::kAdapting: return "adapting";
    case Mode::kArrived: return "arrived";
    case Mode::kIntercepted: return "intercepted";
    case Mode::kAbandoned: return "abandoned";
    case Mode::kNoPath: return "no-path";
  }
  return "following";
}

const char* pursuit_status_name(PursuitStatus s) {
  switch (s) {
    case PursuitStatus::kActive: return "active";
    case PursuitStatus::kInterception: return "interception";
    case PursuitStatus::kAbandonedLos: return "abandoned_los";
    case PursuitStatus::kAbandonedEffort: return "abandoned_effort";
  }
  return "active";
}

bool Obstacle::active_at(double t) const {
  if (schedule.empty()) return true;
  return std::any_of(schedule.begin(), schedule.end(),
                     [t](const auto& iv) { return t >= iv.first && t < iv.second; });
}

bool Obstacle::covers(CellIndex c) const {
  return std::find(footprint.begin(), footprint.end(), c) != footprint.end();
}

void validate(const Obstacle& o, const ElevationGrid& grid) {
  if (o.footprint.empty()) throw_invalid("obstacle '" + o.id + "': empty footprint");
  for (const CellIndex c : o.footprint) {
    if (!grid.in_bounds(c)) throw_invalid(fmt::format("obstacle '{}': cell ({}, {}) out of bounds", o.id, c.row, c.col));
  }
  double prev_end = -std::numeric_limits<double>::infinity();
  for (const auto& [appear, disappear] : o.schedule) {
    if (!std::isfinite(appear) || !(disappear > appear) || appear < 0.0) {
      throw_invalid("obstacle '" + o.id + "': schedule interval must satisfy 0 <= appear < disappear");
    }
    if (appear < prev_end) throw_invalid("obstacle '" + o.id + "': schedule intervals overlap or are unordered");
    prev_end = disappear;
  }
}

double effort_accrual(double seconds, double slope_percent) { return seconds * (1.0 + slope_percent / 100.0); }

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "t_s,row,col,easting,northing,elevation_m,mode,chi,action,speed_mps,d_t_cells,effort\n";
  for (const auto& r : trace) {
    out << fmt::format("{:.3f},{},{},{:.3f},{:.3f},{:.3f},{},{},{},{:.6f},{},{:.6f}\n", r.t, r.cell.row, r.cell.col,
                       r.easting, r.northing, r.elevation, mode_name(r.mode), r.chi ? 1 : 0, r.action, r.speed,
                       r.deviation, r.effort);
  }
}

// ---------------------------------------------------------------------------

World::World(ElevationGrid grid, WorldOptions options) : grid_(std::move(grid)), options_(options) {
  if (!(options_.dt > 0.0) || !std::isfinite(options_.dt)) throw_invalid("dt must be positive");
}

std::size_t World::add_agent(AgentSpec spec) {
  agents::validate(spec.profile);
  for (const CellIndex c : {spec.start, spec.goal}) {
    if (!grid_.traversable(c)) {
      throw_invalid(fmt::format("agent '{}': cell ({}, {}) is not traversable", spec.id, c.row, c.col));
    }
  }
  AgentState a;
  a.spec = std::move(spec);
  a.cell = a.spec.start;
  auto result = planner::astar(grid_, a.spec.profile, a.spec.start, a.spec.goal, options_.cost_mode);
  ++a.astar_calls;
  a.search = result.stats;
  if (!result.plan) {
    a.mode = Mode::kNoPath;
    a.outcome = "no-path";
  } else {
    a.plan = std::move(result.plan);
    a.waypoint_index = 1;
    if (a.plan->size() == 1) {
      a.mode = Mode::kArrived;
      a.outcome = "arrived";
      a.arrival_time = clock_;
    }
  }
  a.last_action = "start";
  agents_.push_back(std::move(a));
  record(agents_.back(), clock_, 0.0);
  return agents_.size() - 1;
}

void World::add_obstacle(Obstacle o) {
  validate(o, grid_);
  obstacles_.push_back(std::move(o));
}

void World::add_pursuit(const PursuitRule& rule) {
  if (rule.pursuer >= agents_.size() || rule.target >= agents_.size() || rule.pursuer == rule.target) {
    throw_invalid("pursuit: pursuer and target must be two distinct agents");
  }
  if (!(rule.los_loss_limit > 0.0)) throw_invalid("pursuit: los_loss_limit must be positive");
  if (!(rule.capture_radius > 0.0)) throw_invalid("pursuit: capture_radius must be positive");
  if (!(rule.effort_budget >= 0.0)) throw_invalid("pursuit: effort_budget must be non-negative");
  PursuitState s;
  s.rule = rule;
  pursuits_.push_back(s);
}

std::pair<double, double> World::position(const AgentState& a) const {
  const double e0 = grid_.easting(a.cell), n0 = grid_.northing(a.cell);
  if (!a.edge_to || a.edge_duration <= 0.0) return {e0, n0};
  const double f = a.edge_elapsed / a.edge_duration;
  return {e0 + f * (grid_.easting(*a.edge_to) - e0), n0 + f * (grid_.northing(*a.edge_to) - n0)};
}

CellIndex World::occupied_cell(const AgentState& a) const {
  if (!a.edge_to || a.edge_elapsed * 2.0 < a.edge_duration) return a.cell;
  return *a.edge_to;
}

bool World::ignores(std::size_t self, std::size_t other) const {
  // A pursuer must be able to close in on its own target.
  return std::any_of(pursuits_.begin(), pursuits_.end(), [&](const PursuitState& p) {
    return p.status == PursuitStatus::kActive && p.rule.pursuer == self && p.rule.target == other;
  });
}

bool World::blocked_for(std::size_t self, CellIndex c) const {
  for (const auto& o : obstacles_) {
    if (o.active_at(clock_) && o.covers(c)) return true;
  }
  const double half = grid_.cellsize() / 2.0;
  const double ce = grid_.easting(c), cn = grid_.northing(c);
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    if (j == self) continue;
    const auto& other = agents_[j];
    if (!other.active() || ignores(self, j)) continue;
    if (other.edge_to && *other.edge_to == c) return true;
    // Disc of the other agent against the cell square.
    const auto [e, n] = position(other);
    const double dx = std::max(0.0, std::abs(e - ce) - half);
    const double dy = std::max(0.0, std::abs(n - cn) - half);
    if (dx * dx + dy * dy <= other.spec.profile.body_radius * other.spec.profile.body_radius) return true;
  }
  return false;
}

int World::deviation(const AgentState& a) const {
  if (!a.plan) return 0;
  if (a.mode == Mode::kFollowing || a.mode == Mode::kArrived) return 0;
  return local_adapt::deviation_cells(*a.plan, a.waypoint_index, a.cell);
}

void World::record(AgentState& a, double t, double speed) {
  TraceRecord r;
  r.t = t;
  r.cell = occupied_cell(a);
  std::tie(r.easting, r.northing) = position(a);
  r.elevation = grid_.elevation(r.cell);
  r.mode = a.mode;
  r.chi = a.chi;
  r.action = a.last_action;
  r.speed = speed;
  r.deviation = deviation(a);
  r.effort = a.effort;
  a.trace.push_back(std::move(r));
}

void World::begin_edge(AgentState& a, CellIndex to) {
  const auto t = agents::traversal_time(a.spec.profile, grid_, a.cell, to);
  a.edge_to = to;
  a.edge_duration = *t;
  a.edge_elapsed = 0.0;
  a.edge_slope = agents::effective_slope(a.spec.profile, terrain::slope_percent(grid_, a.cell, to));
}

void World::arrive_at_cell(AgentState& a, double at_time) {
  const auto& plan = *a.plan;
  if (a.mode == Mode::kAdapting) {
    const auto r = local_adapt::rejoin_check(a.cell, plan, a.waypoint_index);
    if (!r.rejoined) return;
    a.waypoint_index = r.waypoint_index + 1;
    a.mode = Mode::kFollowing;
    a.chi = false;
  } else if (a.waypoint_index < plan.size() && a.cell == plan.waypoints[a.waypoint_index]) {
    ++a.waypoint_index;
  }
  if (a.waypoint_index >= plan.size()) {
    const std::size_t self = static_cast<std::size_t>(&a - agents_.data());
    const bool hunting = std::any_of(pursuits_.begin(), pursuits_.end(), [&](const PursuitState& p) {
      return p.status == PursuitStatus::kActive && p.rule.pursuer == self;
    });
    if (!hunting) {
      a.mode = Mode::kArrived;
      a.outcome = "arrived";
      a.arrival_time = at_time;
    }
  }
}

void World::move_agent(std::size_t i) {
  AgentState& a = agents_[i];
  if (!a.active()) return;
  const double step_start = clock_;
  const auto [e0, n0] = position(a);
  double budget = options_.dt;
  const LocalView view{grid_, a.spec.profile, [this, i](CellIndex c) { return blocked_for(i, c); }};

  // An obstacle that appears on the cell being entered sends the agent back.
  if (a.edge_to) {
    const CellIndex dest = *a.edge_to;
    const bool obstructed = std::any_of(obstacles_.begin(), obstacles_.end(), [&](const Obstacle& o) {
      return o.active_at(clock_) && o.covers(dest);
    });
    if (obstructed) {
      const double f = a.edge_elapsed / a.edge_duration;
      const CellIndex from = a.cell;
      a.distance += f * grid_.run(from, dest);
      a.cell = dest;
      begin_edge(a, from);
      a.edge_elapsed = (1.0 - f) * a.edge_duration;
      a.last_action = "reverse";
    }
  }

  while (budget > 0.0 && a.active()) {
    if (a.edge_to) {
      const double take = std::min(budget, a.edge_duration - a.edge_elapsed);
      a.edge_elapsed += take;
      a.moving_time += take;
      a.effort += effort_accrual(take, a.edge_slope);
      budget -= take;
      if (a.edge_elapsed >= a.edge_duration) {
        a.distance += grid_.run(a.cell, *a.edge_to);
        a.route_time += a.edge_duration;
        a.cell = *a.edge_to;
        a.edge_to.reset();
        a.edge_elapsed = a.edge_duration = 0.0;
        arrive_at_cell(a, step_start + (options_.dt - budget));
      }
      continue;
    }

    const auto& plan = *a.plan;
    if (a.waypoint_index >= plan.size()) {
      // A pursuer at the end of its spliced route waits for new sightings.
      a.last_action = "stay";
      a.delay_time += budget;
      break;
    }

    const CellIndex next = plan.waypoints[a.waypoint_index];
    const bool next_blocked = blocked_for(i, next);
    if (a.mode == Mode::kFollowing) {
      if (next_blocked) {
        a.mode = Mode::kAdapting;
        a.cleared = false;
      }
    } else if (a.cell == plan.waypoints[a.waypoint_index - 1] && !next_blocked) {
      a.mode = Mode::kFollowing;
    }
    a.chi = a.mode == Mode::kAdapting;

    Action action = Action::kStay;
    if (a.chi) {
      if (a.spec.qtable) {
        const auto s = local_adapt::make_state(view, plan, a.waypoint_index, a.cell, true);
        action = local_adapt::hierarchical_policy(true, plan, a.waypoint_index, *a.spec.qtable, s, view, a.cell);
      }
    } else {
      static const local_adapt::QTable kUnused;
      action = local_adapt::hierarchical_policy(false, plan, a.waypoint_index, kUnused, {}, view, a.cell);
    }
    if (local_adapt::is_move(action) && !local_adapt::move_available(view, a.cell, local_adapt::to_direction(action))) {
      ++a.collisions;
      action = Action::kStay;
    }
    a.last_action = local_adapt::action_name(action);
    if (!local_adapt::is_move(action)) {
      a.delay_time += budget;
      break;
    }
    begin_edge(a, terrain::step(a.cell, local_adapt::to_direction(action)));
    if (a.chi && !a.cleared && local_adapt::bypass_clear(view, plan, a.waypoint_index, *a.edge_to)) a.cleared = true;
  }

  const auto [e1, n1] = position(a);
  record(a, step_start + options_.dt, std::hypot(e1 - e0, n1 - n0) / options_.dt);
}

void World::splice_toward(AgentState& a, CellIndex target) {
  if (!a.plan || a.mode != Mode::kFollowing) return;
  auto& plan = *a.plan;
  const std::size_t anchor = a.edge_to ? a.waypoint_index : a.waypoint_index - 1;
  if (plan.waypoints.back() == target && anchor < plan.size()) return;

  std::vector<CellIndex> cells(plan.waypoints.begin(), plan.waypoints.begin() + static_cast<std::ptrdiff_t>(anchor) + 1);
  CellIndex cur = cells.back();
  while (cur != target) {
    double best = terrain::octile(cur, target);
    std::optional<CellIndex> pick;
    for (const CellIndex n : terrain::neighbors(grid_, cur)) {
      if (!agents::traversal_time(a.spec.profile, grid_, cur, n)) continue;
      const double d = terrain::octile(n, target);
      if (d < best) {
        best = d;
        pick = n;
      }
    }
    if (!pick) break;
    cur = *pick;
    cells.push_back(cur);
  }
  plan = planner::make_plan(grid_, a.spec.profile, std::move(cells));
}

void World::update_pursuit(PursuitState& p) {
  if (p.status != PursuitStatus::kActive) return;
  AgentState& hunter = agents_[p.rule.pursuer];
  AgentState& prey = agents_[p.rule.target];
  if (!hunter.active() || prey.mode == Mode::kIntercepted || prey.mode == Mode::kNoPath) return;

  auto finish = [&](PursuitStatus s, Mode hunter_mode, const char* outcome) {
    p.status = s;
    p.end_time = clock_;
    hunter.mode = hunter_mode;
    hunter.outcome = outcome;
  };

  const auto [he, hn] = position(hunter);
  const auto [pe, pn] = position(prey);
  if (std::hypot(he - pe, hn - pn) <= p.rule.capture_radius) {
    finish(PursuitStatus::kInterception, Mode::kArrived, "interception");
    hunter.arrival_time = clock_;
    prey.mode = Mode::kIntercepted;
    prey.outcome = "intercepted";
    return;
  }
  if (hunter.effort > p.rule.effort_budget) {
    finish(PursuitStatus::kAbandonedEffort, Mode::kAbandoned, "abandoned_effort");
    return;
  }
  const CellIndex from = occupied_cell(hunter), to = occupied_cell(prey);
  const bool visible = terrain::line_of_sight(grid_, from, to, options_.eye_height, options_.eye_height);
  if (visible) {
    p.los_lost_for = 0.0;
    p.last_seen = prey.heading();
    const std::size_t before = hunter.plan ? hunter.plan->size() : 0;
    const CellIndex before_end = hunter.plan ? hunter.plan->waypoints.back() : CellIndex{};
    splice_toward(hunter, *p.last_seen);
    if (hunter.plan && (hunter.plan->size() != before || hunter.plan->waypoints.back() != before_end)) ++p.splices;
    return;
  }
  p.los_lost_for += options_.dt;
  if (p.los_lost_for >= p.rule.los_loss_limit) {
    finish(PursuitStatus::kAbandonedLos, Mode::kAbandoned, "abandoned_los");
  }
}

void World::step() {
  for (std::size_t i = 0; i < agents_.size(); ++i) move_agent(i);
  clock_ += options_.dt;
  for (auto& p : pursuits_) update_pursuit(p);
  // Pursuit outcomes change modes after the movement records were written.
  for (auto& a : agents_) {
    if (!a.trace.empty() && a.trace.back().t == clock_) a.trace.back().mode = a.mode;
  }
}

bool World::finished() const {
  return std::none_of(agents_.begin(), agents_.end(), [](const AgentState& a) { return a.active(); });
}

void World::run(double max_time) {
  while (!finished() && clock_ + options_.dt <= max_time + 1e-9) step();
}

// ---------------------------------------------------------------------------

AgentSummary summarize(const World& w, std::size_t i) {
  const AgentState& a = w.agent(i);
  AgentSummary s;
  s.id = a.spec.id;
  s.profile = a.spec.profile.name;
  s.outcome = a.outcome.empty() ? std::string("timeout") : a.outcome;
  s.duration = a.arrival_time >= 0.0 ? a.arrival_time : -1.0;
  s.distance = a.distance;
  s.effort = a.effort;
  s.avg_speed = s.duration > 0.0 ? s.distance / s.duration : 0.0;
  if (a.plan) {
    s.plan_time = a.plan->total_time;
    s.plan_distance = a.plan->total_distance;
  }
  s.astar_calls = a.astar_calls;
  s.nodes_expanded = a.search.nodes_expanded;
  return s;
}

TransportRow make_transport_row(const std::string& route, const AgentSummary& slow, const AgentSummary& fast) {
  TransportRow r;
  r.route = route;
  r.slow_mode = slow.profile;
  r.fast_mode = fast.profile;
  r.slow_duration = slow.duration;
  r.slow_distance = slow.distance;
  r.fast_duration = fast.duration;
  r.fast_distance = fast.distance;
  if (slow.duration < 0.0 || fast.duration < 0.0) {
    r.note = slow.duration < 0.0 ? slow.profile + ": " + slow.outcome : fast.profile + ": " + fast.outcome;
    return r;
  }
  r.difference = slow.duration - fast.duration;
  r.reduction_percent = slow.duration > 0.0 ? r.difference / slow.duration * 100.0 : 0.0;
  r.distance_reduction_percent =
      slow.distance > 0.0 ? (slow.distance - fast.distance) / slow.distance * 100.0 : 0.0;
  return r;
}

TransportRun compare_transport(const ElevationGrid& grid, const WorldOptions& options,
                               const std::vector<Obstacle>& obstacles, const AgentSpec& first,
                               const AgentSpec& second, double max_time, const std::string& route) {
  TransportRun out;
  auto run_one = [&](const AgentSpec& spec, AgentSummary& summary, std::vector<TraceRecord>& trace) {
    World w(grid, options);
    for (const auto& o : obstacles) w.add_obstacle(o);
    w.add_agent(spec);
    w.run(max_time);
    summary = summarize(w, 0);
    trace = w.agent(0).trace;
  };
  run_one(first, out.first, out.first_trace);
  run_one(second, out.second, out.second_trace);
  out.row = make_transport_row(route, out.first, out.second);
  return out;
}

}  // namespace terramob::sim
