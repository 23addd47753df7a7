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

#include "terramob/local_adapt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace terramob::local_adapt {

using planner::PathPlan;

const char* action_name(Action a) {
  static constexpr const char* kNames[] = {"N", "NE", "E", "SE", "S", "SW", "W", "NW", "stay"};
  return kNames[static_cast<int>(a)];
}

LocalState LocalState::from_code(int code) {
  if (code < 0 || code >= kStateCount) throw_invalid("state code out of range");
  LocalState s;
  s.occupancy = static_cast<std::uint8_t>(code & 0xFF);
  s.waypoint_dir = static_cast<Direction>((code >> 8) & 0x7);
  s.deviation_bucket = static_cast<std::uint8_t>((code >> 11) & 0x3);
  return s;
}

Direction direction_bucket(CellIndex from, CellIndex to) {
  // Bearing clockwise from north; north is decreasing row.
  const double bearing = std::atan2(static_cast<double>(to.col - from.col), static_cast<double>(from.row - to.row));
  int sector = static_cast<int>(std::lround(bearing / (std::numbers::pi / 4.0)));
  sector = ((sector % 8) + 8) % 8;
  return static_cast<Direction>(sector);
}

int transform(Direction d, int g) {
  int v = static_cast<int>(d);
  if (g & 4) v = (8 - v) % 8;
  return (v + 2 * (g & 3)) % 8;
}

LocalState transform(LocalState s, int g) {
  LocalState out = s;
  out.occupancy = 0;
  for (int d = 0; d < terrain::kDirectionCount; ++d) {
    if (s.occupied(static_cast<Direction>(d))) out.occupancy |= static_cast<std::uint8_t>(1U << transform(static_cast<Direction>(d), g));
  }
  out.waypoint_dir = static_cast<Direction>(transform(s.waypoint_dir, g));
  return out;
}

Action transform(Action a, int g) {
  return is_move(a) ? static_cast<Action>(transform(to_direction(a), g)) : a;
}

// ---------------------------------------------------------------------------
// QTable

QTable::QTable()
    : values_(static_cast<std::size_t>(kStateCount) * kActionCount, 0.0),
      visits_(static_cast<std::size_t>(kStateCount) * kActionCount, 0) {}

double QTable::max_value(LocalState s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

double QTable::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::size_t QTable::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

namespace {

constexpr const char* kMagic = "terramob-qtable";
constexpr int kFormatVersion = 1;
constexpr const char* kEncoding = "occupancy8-bearing8-deviation4";

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_qtable(std::ostream& out, const QTable& q) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "state_space " << kEncoding << ' ' << kStateCount << ' ' << kActionCount << '\n';
  out << "gamma " << shortest(q.info.gamma) << '\n';
  out << "alpha " << shortest(q.info.alpha) << '\n';
  out << "seed " << q.info.seed << '\n';
  out << "episodes " << q.info.episodes << '\n';
  out << "entries " << q.nonzero_count() << '\n';
  for (int code = 0; code < kStateCount; ++code) {
    for (int a = 0; a < kActionCount; ++a) {
      const double v = q.value(code, static_cast<Action>(a));
      if (v != 0.0) out << code << ' ' << a << ' ' << shortest(v) << '\n';
    }
  }
}

QTable read_qtable(std::istream& in) {
  QTable q;
  std::string line;
  int line_no = 0;
  auto next = [&](const char* expected_key) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) break;
    }
    if (!in && line.empty()) throw ParseError(line_no, std::string("unexpected end of file, expected ") + expected_key);
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != expected_key) throw ParseError(line_no, "expected '" + std::string(expected_key) + "', got '" + key + "'");
    return ls;
  };
  auto fail = [&](const std::string& what) { throw ParseError(line_no, what); };

  {
    auto ls = next(kMagic);
    int version = 0;
    if (!(ls >> version) || version != kFormatVersion) fail("unsupported qtable version");
  }
  {
    auto ls = next("state_space");
    std::string enc;
    int states = 0, actions = 0;
    if (!(ls >> enc >> states >> actions) || enc != kEncoding || states != kStateCount || actions != kActionCount) {
      fail("state space does not match " + std::string(kEncoding));
    }
  }
  if (!(next("gamma") >> q.info.gamma)) fail("bad gamma");
  if (!(next("alpha") >> q.info.alpha)) fail("bad alpha");
  if (!(next("seed") >> q.info.seed)) fail("bad seed");
  if (!(next("episodes") >> q.info.episodes)) fail("bad episodes");
  std::size_t entries = 0;
  if (!(next("entries") >> entries)) fail("bad entries");

  for (std::size_t i = 0; i < entries; ++i) {
    if (!std::getline(in, line)) fail("missing qtable entries");
    ++line_no;
    std::istringstream ls(line);
    int code = -1, action = -1;
    std::string value_text;
    if (!(ls >> code >> action >> value_text) || code < 0 || code >= kStateCount || action < 0 ||
        action >= kActionCount) {
      fail("malformed entry");
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value_text.data(), value_text.data() + value_text.size(), v);
    if (ec != std::errc() || ptr != value_text.data() + value_text.size() || !std::isfinite(v)) {
      fail("non-numeric value '" + value_text + "'");
    }
    q.set(code, static_cast<Action>(action), v);
  }
  return q;
}

void save_qtable(const std::string& path, const QTable& q) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_qtable(out, q);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

QTable load_qtable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_qtable(in);
}

// ---------------------------------------------------------------------------
// Rewards and updates

void validate(const RewardWeights& w) {
  for (double v : {w.r_coll, w.r_delay, w.r_dev, w.r_rejoin, w.r_clear}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw_invalid("reward weights must be finite and non-negative");
  }
}

double LearningParams::epsilon_at(int episode) const {
  if (epsilon_decay_episodes <= 0 || episode >= epsilon_decay_episodes) return epsilon_end;
  const double frac = static_cast<double>(episode) / epsilon_decay_episodes;
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

void validate(const LearningParams& p) {
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw_invalid("alpha must be in (0, 1]");
  if (!(p.gamma >= 0.0 && p.gamma < 1.0)) throw_invalid("gamma must be in [0, 1)");
  for (double e : {p.epsilon_start, p.epsilon_end}) {
    if (!(e >= 0.0 && e <= 1.0)) throw_invalid("epsilon must be in [0, 1]");
  }
  if (p.epsilon_decay_episodes < 0) throw_invalid("epsilon_decay_episodes must be >= 0");
  if (p.episodes < 0) throw_invalid("episodes must be >= 0");
  if (p.max_steps_per_episode <= 0) throw_invalid("max_steps_per_episode must be positive");
}

StepEvent classify(const StepOutcome& o) {
  if (o.collided) return {EventKind::kCollision, 0.0};
  if (o.rejoined) return {EventKind::kRejoin, 0.0};
  if (o.cleared) return {EventKind::kClear, 0.0};
  if (o.deviation_cells > 0) return {EventKind::kDeviation, static_cast<double>(o.deviation_cells)};
  if (o.delay_seconds > 0.0) return {EventKind::kDelay, o.delay_seconds};
  return {EventKind::kNone, 0.0};
}

double reward(const StepEvent& e, const RewardWeights& w) {
  if (e.amount < 0.0) throw_invalid("reward: negative delay or deviation");
  switch (e.kind) {
    case EventKind::kCollision: return -w.r_coll;
    case EventKind::kDelay: return -w.r_delay * e.amount;
    case EventKind::kDeviation: return -w.r_dev * e.amount;
    case EventKind::kRejoin: return w.r_rejoin;
    case EventKind::kClear: return w.r_clear;
    case EventKind::kNone: return 0.0;
  }
  return 0.0;
}

const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::kCollision: return "collision";
    case EventKind::kRejoin: return "rejoin";
    case EventKind::kClear: return "clear";
    case EventKind::kDeviation: return "deviation";
    case EventKind::kDelay: return "delay";
    case EventKind::kNone: return "none";
  }
  return "none";
}

void q_update(QTable& q, LocalState s, Action a, double r, LocalState s_next, double alpha, double gamma,
              bool terminal) {
  const double current = q.value(s, a);
  const double bootstrap = terminal ? 0.0 : gamma * q.max_value(s_next);
  q.record(s, a, current + alpha * (r + bootstrap - current));
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

Action select_action(const QTable& q, LocalState s, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw_invalid("epsilon must be in [0, 1]");
  if (uniform01(rng) < epsilon) {
    std::array<Action, kActionCount> feasible{};
    std::size_t n = 0;
    for (int d = 0; d < terrain::kDirectionCount; ++d) {
      if (!s.occupied(static_cast<Direction>(d))) feasible[n++] = static_cast<Action>(d);
    }
    feasible[n++] = Action::kStay;
    return feasible[uniform_index(rng, n)];
  }
  const auto r = q.row(s);
  return static_cast<Action>(std::max_element(r.begin(), r.end()) - r.begin());
}

Action greedy_feasible_action(const QTable& q, LocalState s) {
  const auto r = q.row(s);
  Action best = Action::kStay;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < kActionCount; ++a) {
    const auto act = static_cast<Action>(a);
    if (is_move(act) && s.occupied(to_direction(act))) continue;
    if (r[a] > best_value) {
      best_value = r[a];
      best = act;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Local geometry

namespace {

bool cell_available(const LocalView& view, CellIndex from, CellIndex to) {
  if (!view.grid.traversable(to)) return false;
  if (view.is_blocked(to)) return false;
  return agents::traversal_time(view.profile, view.grid, from, to).has_value();
}

bool side_unavailable(const LocalView& view, CellIndex c) { return !view.grid.traversable(c) || view.is_blocked(c); }

}  // namespace

bool move_available(const LocalView& view, CellIndex at, Direction d) {
  const CellIndex to = terrain::step(at, d);
  if (!cell_available(view, at, to)) return false;
  if (terrain::is_diagonal(d)) {
    const auto o = terrain::kOffsets[static_cast<int>(d)];
    if (side_unavailable(view, {at.row + o.drow, at.col}) && side_unavailable(view, {at.row, at.col + o.dcol})) {
      return false;
    }
  }
  return true;
}

std::uint8_t occupancy_bits(const LocalView& view, CellIndex at) {
  std::uint8_t bits = 0;
  for (int d = 0; d < terrain::kDirectionCount; ++d) {
    if (!move_available(view, at, static_cast<Direction>(d))) bits |= static_cast<std::uint8_t>(1U << d);
  }
  return bits;
}

std::size_t rejoin_target(const LocalView& view, const PathPlan& plan, std::size_t waypoint_index) {
  const std::size_t last = plan.size() - 1;
  const std::size_t begin = std::min(waypoint_index, last);
  const std::size_t end = std::min(begin + kRejoinLookahead, last);
  for (std::size_t j = begin; j <= end; ++j) {
    if (!view.is_blocked(plan.waypoints[j])) return j;
  }
  return end;
}

int deviation_cells(const PathPlan& plan, std::size_t waypoint_index, CellIndex at) {
  const std::size_t from = std::min(waypoint_index, plan.size() - 1);
  int best = std::numeric_limits<int>::max();
  for (std::size_t j = from; j < plan.size(); ++j) {
    best = std::min(best, terrain::chebyshev(at, plan.waypoints[j]));
    if (best == 0) break;
  }
  return best == std::numeric_limits<int>::max() ? 0 : best;
}

LocalState make_state(const LocalView& view, const PathPlan& plan, std::size_t waypoint_index, CellIndex at,
                      bool adapting) {
  LocalState s;
  s.occupancy = occupancy_bits(view, at);
  const std::size_t tracked = adapting ? std::min(rejoin_target(view, plan, waypoint_index) + kTrackingLead, plan.size() - 1)
                                       : std::min(waypoint_index, plan.size() - 1);
  const CellIndex target = plan.waypoints[tracked];
  s.waypoint_dir = target == at ? Direction::kN : direction_bucket(at, target);
  s.deviation_bucket = deviation_bucket(deviation_cells(plan, waypoint_index, at));
  return s;
}

bool detect_block(const LocalView& view, const PathPlan& plan, std::size_t waypoint_index) {
  if (waypoint_index >= plan.size()) return false;
  return view.is_blocked(plan.waypoints[waypoint_index]);
}

RejoinResult rejoin_check(CellIndex agent_cell, const PathPlan& plan, std::size_t waypoint_index) {
  for (std::size_t j = waypoint_index; j < plan.size(); ++j) {
    if (plan.waypoints[j] == agent_cell) return {true, j};
  }
  return {false, waypoint_index};
}

bool bypass_clear(const LocalView& view, const PathPlan& plan, std::size_t waypoint_index, CellIndex at) {
  const CellIndex target = plan.waypoints[rejoin_target(view, plan, waypoint_index)];
  if (view.is_blocked(target)) return false;
  const auto line = terrain::supercover_line(at, target);
  return std::none_of(line.begin(), line.end(), [&](CellIndex c) { return view.is_blocked(c); });
}

Action hierarchical_policy(bool chi, const PathPlan& plan, std::size_t waypoint_index, const QTable& q,
                           LocalState s, const LocalView& view, CellIndex at) {
  if (chi) return greedy_feasible_action(q, s);
  if (waypoint_index >= plan.size()) return Action::kStay;

  const CellIndex target = plan.waypoints[waypoint_index];
  Action best = Action::kStay;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int d = 0; d < terrain::kDirectionCount; ++d) {
    const auto dir = static_cast<Direction>(d);
    if (!move_available(view, at, dir)) continue;
    const CellIndex to = terrain::step(at, dir);
    const auto step_cost = planner::edge_cost(view.grid, view.profile, at, to);
    if (!step_cost) continue;
    double remaining = 0.0;
    if (to != target) {
      if (terrain::chebyshev(to, target) == 1) {
        const auto w = planner::edge_cost(view.grid, view.profile, to, target);
        if (!w) continue;
        remaining = *w;
      } else {
        remaining = planner::heuristic(to, target, view.profile, view.grid.cellsize());
      }
    }
    const double cost = *step_cost + remaining;
    if (cost < best_cost) {
      best_cost = cost;
      best = to_action(dir);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Corridor training

void validate(const CorridorEnv& env) {
  if (env.plan_half_length < 2) throw_invalid("plan_half_length must be >= 2");
  if (env.size < 2 * env.plan_half_length + 3) throw_invalid("corridor size too small for the plan");
  if (env.max_obstacle_extent < 1 || env.max_obstacle_extent > env.plan_half_length - 1) {
    throw_invalid("max_obstacle_extent out of range");
  }
  if (!(env.cellsize > 0.0)) throw_invalid("cellsize must be positive");
  if (!(env.clutter_probability >= 0.0 && env.clutter_probability <= 1.0)) {
    throw_invalid("clutter_probability must be in [0, 1]");
  }
}

ElevationGrid corridor_grid(const CorridorEnv& env) {
  return ElevationGrid(env.size, env.size, 0.0, 0.0, env.cellsize, -9999.0,
                       std::vector<double>(static_cast<std::size_t>(env.size) * env.size, 0.0));
}

Placement sample_placement(const CorridorEnv& env, Rng& rng) {
  const int centre = env.size / 2;
  const int half = env.plan_half_length;
  for (;;) {
    Placement pl;
    const auto dir = static_cast<Direction>(uniform_index(rng, terrain::kDirectionCount));
    const auto o = terrain::kOffsets[static_cast<int>(dir)];
    for (int i = -half; i <= half; ++i) pl.plan_cells.push_back({centre + i * o.drow, centre + i * o.dcol});
    pl.start_index = static_cast<std::size_t>(half - 2);
    const CellIndex blocked = pl.plan_cells[pl.start_index + 1];

    const int h = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(env.max_obstacle_extent)));
    const int w = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(env.max_obstacle_extent)));
    const int r0 = blocked.row - static_cast<int>(uniform_index(rng, static_cast<std::size_t>(h)));
    const int c0 = blocked.col - static_cast<int>(uniform_index(rng, static_cast<std::size_t>(w)));
    for (int r = r0; r < r0 + h; ++r)
      for (int c = c0; c < c0 + w; ++c) pl.obstacle.push_back({r, c});
    if (uniform01(rng) < env.clutter_probability) {
      const int dr = static_cast<int>(uniform_index(rng, 5)) - 2;
      const int dc = static_cast<int>(uniform_index(rng, 5)) - 2;
      pl.obstacle.push_back({blocked.row + dr, blocked.col + dc});
    }

    // Keep the agent's cell, the goal and at least one plan cell past the
    // obstacle free, and stay inside the grid.
    auto covered = [&](CellIndex c) { return std::find(pl.obstacle.begin(), pl.obstacle.end(), c) != pl.obstacle.end(); };
    bool ok = !covered(pl.plan_cells[pl.start_index]) && !covered(pl.plan_cells.back());
    for (const CellIndex c : pl.obstacle) ok = ok && c.row >= 1 && c.col >= 1 && c.row < env.size - 1 && c.col < env.size - 1;
    if (!ok) continue;
    std::sort(pl.obstacle.begin(), pl.obstacle.end());
    pl.obstacle.erase(std::unique(pl.obstacle.begin(), pl.obstacle.end()), pl.obstacle.end());
    return pl;
  }
}

namespace {

struct EpisodeSetup {
  const ElevationGrid& grid;
  const agents::AgentProfile& profile;
  const Placement& placement;
};

// Runs one bypass episode. With `learner` set the table is updated with
// epsilon-greedy exploration; otherwise the greedy feasible policy is rolled out.
EpisodeStats run_episode(const EpisodeSetup& setup, QTable& q, const RewardWeights& w, int max_steps,
                         const LearningParams* learner, double epsilon, Rng& rng) {
  const auto& pl = setup.placement;
  const PathPlan plan = planner::make_plan(setup.grid, setup.profile, pl.plan_cells);
  const LocalView view{setup.grid, setup.profile, [&](CellIndex c) {
                         return std::binary_search(pl.obstacle.begin(), pl.obstacle.end(), c);
                       }};

  EpisodeStats stats;
  CellIndex at = plan.waypoints[pl.start_index];
  const std::size_t wi = pl.start_index + 1;
  bool cleared = false;
  int prev_deviation = deviation_cells(plan, wi, at);
  LocalState s = make_state(view, plan, wi, at, true);

  for (int step = 0; step < max_steps; ++step) {
    const Action a = learner ? select_action(q, s, epsilon, rng) : greedy_feasible_action(q, s);
    StepOutcome out;
    bool terminal = false;
    if (is_move(a)) {
      if (!move_available(view, at, to_direction(a))) {
        out.collided = true;
        terminal = true;
        ++stats.collisions;
      } else {
        at = terrain::step(at, to_direction(a));
      }
    }
    if (!out.collided) {
      if (rejoin_check(at, plan, wi).rejoined) {
        out.rejoined = true;
        terminal = true;
        stats.success = true;
      } else {
        if (!cleared && bypass_clear(view, plan, wi, at)) {
          cleared = true;
          out.cleared = true;
        }
        out.deviation_cells = deviation_cells(plan, wi, at);
        // No waypoint advance without a rejoin, so the step is a delay unless d_t shrank.
        if (out.deviation_cells >= prev_deviation) out.delay_seconds = 1.0;
        prev_deviation = out.deviation_cells;
      }
    }
    const double r = reward(classify(out), w);
    stats.total_return += r;
    stats.steps = step + 1;
    const LocalState s_next = make_state(view, plan, wi, at, true);
    if (learner) {
      for (int g = 0; g < kSymmetryCount; ++g) {
        q_update(q, transform(s, g), transform(a, g), r, transform(s_next, g), *learner, terminal);
      }
    }
    s = s_next;
    if (terminal) break;
  }
  return stats;
}

}  // namespace

TrainResult train_bypass(const CorridorEnv& env, const RewardWeights& w, const LearningParams& p) {
  validate(env);
  validate(w);
  validate(p);
  TrainResult result;
  result.table.info = {p.gamma, p.alpha, p.seed, p.episodes};
  const ElevationGrid grid = corridor_grid(env);
  const auto& profile = agents::builtin_profile("Fit adults");
  Rng rng(p.seed);
  result.curve.reserve(static_cast<std::size_t>(p.episodes));
  for (int ep = 0; ep < p.episodes; ++ep) {
    const Placement pl = sample_placement(env, rng);
    const EpisodeStats st =
        run_episode({grid, profile, pl}, result.table, w, p.max_steps_per_episode, &p, p.epsilon_at(ep), rng);
    result.curve.push_back({ep, st.total_return, st.success, st.steps, st.collisions});
    result.total_collisions += st.collisions;
  }
  return result;
}

EvalResult evaluate_bypass(const QTable& q, const CorridorEnv& env, const RewardWeights& w, int placements,
                           std::uint64_t seed, int max_steps) {
  validate(env);
  const ElevationGrid grid = corridor_grid(env);
  const auto& profile = agents::builtin_profile("Fit adults");
  Rng rng(seed);
  QTable scratch = q;
  EvalResult result;
  for (int i = 0; i < placements; ++i) {
    const Placement pl = sample_placement(env, rng);
    const EpisodeStats st = run_episode({grid, profile, pl}, scratch, w, max_steps, nullptr, 0.0, rng);
    ++result.trials;
    result.successes += st.success ? 1 : 0;
    result.collisions += st.collisions;
  }
  return result;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "episode,return,success,steps\n";
  for (const auto& p : curve) {
    out << fmt::format("{},{:.6f},{},{}\n", p.episode, p.total_return, p.success ? 1 : 0, p.steps);
  }
}

}  // namespace terramob::local_adapt
