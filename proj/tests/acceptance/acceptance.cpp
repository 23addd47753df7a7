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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "../hybrid_bench.hpp"
#include "../test_support.hpp"
#include "terramob/agents.hpp"
#include "terramob/local_adapt.hpp"
#include "terramob/planner.hpp"
#include "terramob/scenario.hpp"
#include "terramob/sim.hpp"
#include "terramob/terrain.hpp"
#include "terramob/terramob.h"

using namespace terramob;
using terrain::CellIndex;
using terrain::ElevationGrid;
namespace fs = std::filesystem;
namespace la = terramob::local_adapt;

namespace {

const std::string kFixtures = TERRAMOB_FIXTURES;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Collects failed conditions for one criterion; the first few go on the line.
class Criterion {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    if (failures_.size() < 3) failures_.push_back(what);
    ++failed_;
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string out;
    const auto& items = ok() ? notes_ : failures_;
    for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
    if (!ok() && failed_ > static_cast<int>(failures_.size())) out += fmt::format("; +{} more", failed_ - failures_.size());
    return fmt::format("{} checks{}{}", checks_, out.empty() ? "" : ", ", out);
  }

 private:
  int checks_ = 0;
  int failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

const agents::AgentProfile& P(const char* name) { return agents::builtin_profile(name); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CellIndex random_cell(std::mt19937_64& rng, const ElevationGrid& g) {
  std::uniform_int_distribution<int> r(0, g.nrows() - 1), c(0, g.ncols() - 1);
  for (;;) {
    const CellIndex x{r(rng), c(rng)};
    if (g.traversable(x)) return x;
  }
}

// Sum of run / speed over the plan edges, slopes taken from raw elevations.
double closed_form_time(const ElevationGrid& g, const agents::AgentProfile& p, const planner::PathPlan& plan) {
  double t = 0.0;
  for (std::size_t i = 1; i < plan.size(); ++i) {
    const auto a = plan.waypoints[i - 1], b = plan.waypoints[i];
    const double run = g.cellsize() * (a.row != b.row && a.col != b.col ? std::sqrt(2.0) : 1.0);
    const double slope = std::abs(g.elevation(b) - g.elevation(a)) / run * 100.0;
    t += run / agents::speed_at(p, slope).speed;
  }
  return t;
}

std::shared_ptr<const la::QTable> default_table() {
  static const auto q =
      std::make_shared<const la::QTable>(la::train_bypass(la::CorridorEnv{}, la::RewardWeights{}, la::LearningParams{}).table);
  return q;
}

// ---------------------------------------------------------------------------

void mobility_table(Criterion& c) {
  const struct {
    const char* name;
    double slope;
    double printed;
  } rows[] = {{"Fit adults", 15, 1.125}, {"Elderly", 15, 0.50},     {"Families", 15, 0.78},
              {"Hostile", 15, 1.44},     {"Ox-driven cart", 10, 0.84}, {"Mule", 25, 0.96}};
  double worst = 0.0;
  for (const auto& r : rows) {
    const auto s = agents::speed_at(P(r.name), r.slope);
    c.expect(s.passable, fmt::format("{} impassable at {}%", r.name, r.slope));
    const double err = std::abs(s.speed - r.printed);
    worst = std::max(worst, err);
    c.expect(err <= 0.005, fmt::format("{}: {:.5f} vs {:.3f}", r.name, s.speed, r.printed));
  }
  c.note(fmt::format("max |error| {:.5f} m/s", worst));
}

void astar_optimality(Criterion& c) {
  int solved = 0, grids = 0;
  for (const auto& p : agents::builtin_profiles()) {
    std::mt19937_64 rng(5000 + p.name.size());
    for (int k = 0; k < 100; ++k, ++grids) {
      const auto g = testing::random_grid(rng, 32, 32, 30.0, 6.0, 0.05);
      const auto a = random_cell(rng, g), b = random_cell(rng, g);
      const auto r = planner::astar(g, p, a, b);
      const auto oracle = planner::dijkstra_oracle(g, p, a, b);
      c.expect(r.plan.has_value() == oracle.has_value(), p.name + ": reachability differs");
      if (!oracle || !r.plan) continue;
      ++solved;
      c.expect(r.plan->total_time == *oracle,
               fmt::format("{}: astar {:.9f} != oracle {:.9f}", p.name, r.plan->total_time, *oracle));
    }
  }
  // Exhaustive admissibility: every reachable (cell, goal) pair on 16x16 grids.
  std::mt19937_64 rng(321);
  long pairs = 0;
  for (const auto& p : agents::builtin_profiles()) {
    const auto g = testing::random_grid(rng, 16, 16, 30.0, 4.0, 0.03);
    for (std::size_t t = 0; t < g.size(); ++t) {
      const CellIndex from = g.unflat(t);
      if (!g.traversable(from)) continue;
      const auto dist = planner::dijkstra_all(g, p, from);
      for (std::size_t s = 0; s < g.size(); ++s) {
        if (dist[s] == kInf) continue;
        ++pairs;
        const double h = planner::heuristic(from, g.unflat(s), p, g.cellsize());
        c.expect(h <= dist[s], fmt::format("{}: h {:.6f} > cost {:.6f}", p.name, h, dist[s]));
      }
    }
  }
  c.expect(solved >= 300, fmt::format("only {} solvable instances", solved));
  c.note(fmt::format("{} grids, {} solved, all equal; {} admissibility pairs", grids, solved, pairs));
}

void hybrid_contract(Criterion& c) {
  const auto q = default_table();
  const auto eval = la::evaluate_bypass(*q, la::CorridorEnv{}, la::RewardWeights{}, 200, 7);
  c.expect(eval.trials == 200, "expected 200 held-out placements");
  c.expect(eval.success_rate() >= 0.95, fmt::format("bypass success {:.3f} < 0.95", eval.success_rate()));

  const auto bench = testing::run_hybrid_bench(q, la::CorridorEnv{}, 200, 7);
  c.expect(bench.extra_astar_calls == 0, fmt::format("{} extra A* calls", bench.extra_astar_calls));
  c.expect(bench.time_ratio() <= 1.25, fmt::format("hybrid/oracle time {:.3f} > 1.25", bench.time_ratio()));

  // One search per agent in full scenarios too.
  int agents_seen = 0;
  for (const char* file : {"mixed_scenario.json", "pursuit_flat.json", "pursuit_ridge.json",
                           "two_corridor_transport.json", "strict_no_path.json"}) {
    const auto res = scenario::run_scenario(scenario::load_config(kFixtures + "/" + file));
    for (const auto& a : res.report.agents) {
      ++agents_seen;
      c.expect(a.astar_calls == 1, fmt::format("{}: agent {} made {} A* calls", file, a.id, a.astar_calls));
    }
  }
  c.note(fmt::format("bypass {}/{}, hybrid {}/{} arrived at {:.3f}x oracle time, 1 A* call for {} scenario agents",
                     eval.successes, eval.trials, bench.arrived, bench.trials, bench.time_ratio(), agents_seen));
}

void q_properties(Criterion& c) {
  la::Rng rng(99);
  auto random_state = [&] { return la::LocalState::from_code(static_cast<int>(la::uniform_index(rng, la::kStateCount))); };
  auto random_action = [&] { return static_cast<la::Action>(la::uniform_index(rng, la::kActionCount)); };
  const la::RewardWeights w;
  const double gamma = 0.95;
  const double r_max = std::max({w.r_coll, w.r_rejoin, w.r_clear, w.r_dev * 3, w.r_delay * 1.0});
  const double bound = r_max / (1.0 - gamma);
  const la::EventKind kinds[] = {la::EventKind::kCollision, la::EventKind::kRejoin, la::EventKind::kClear,
                                 la::EventKind::kDeviation, la::EventKind::kDelay,  la::EventKind::kNone};

  la::QTable q;
  std::vector<la::LocalState> pool;
  for (int k = 0; k < 16; ++k) pool.push_back(random_state());
  double peak = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const auto kind = kinds[la::uniform_index(rng, 6)];
    const double amount = kind == la::EventKind::kDeviation ? static_cast<double>(la::uniform_index(rng, 4))
                          : kind == la::EventKind::kDelay   ? la::uniform01(rng)
                                                            : 0.0;
    const auto s = pool[la::uniform_index(rng, pool.size())];
    const auto a = random_action();
    la::q_update(q, s, a, la::reward({kind, amount}, w), pool[la::uniform_index(rng, pool.size())],
                 0.01 + 0.99 * la::uniform01(rng), gamma, la::uniform01(rng) < 0.1);
    // Only (s, a) moved, so the running peak over it is the peak over the table.
    peak = std::max(peak, std::abs(q.value(s, a)));
  }
  c.expect(q.max_abs() <= peak, "peak tracking missed an entry");
  c.expect(peak <= bound + 1e-9, fmt::format("|Q| reached {:.4f} > {:.4f}", peak, bound));

  // alpha = 0 changes nothing; any other update changes exactly one entry.
  for (int k = 0; k < 200; ++k) {
    const auto s = random_state(), s2 = random_state();
    const auto a = random_action();
    const la::QTable before = q;
    la::q_update(q, s, a, 3.0 + k, s2, 0.0, gamma);
    c.expect(q == before, "alpha = 0 changed the table");
    la::q_update(q, s, a, 3.0 + k, s2, 0.5, gamma);
    int changed = 0;
    for (int code = 0; code < la::kStateCount; ++code) {
      for (int x = 0; x < la::kActionCount; ++x) {
        changed += q.value(code, static_cast<la::Action>(x)) != before.value(code, static_cast<la::Action>(x));
      }
    }
    c.expect(changed == 1, fmt::format("update changed {} entries", changed));
  }

  // Argmax under constant row shifts.
  for (int k = 0; k < 500; ++k) {
    const auto s = random_state();
    for (int x = 0; x < la::kActionCount; ++x) q.set(s.code(), static_cast<la::Action>(x), la::uniform01(rng) * 4 - 2);
    const auto before = la::select_action(q, s, 0.0, rng);
    const auto feasible = la::greedy_feasible_action(q, s);
    const double shift = la::uniform01(rng) * 200 - 100;
    for (int x = 0; x < la::kActionCount; ++x) {
      q.set(s.code(), static_cast<la::Action>(x), q.value(s, static_cast<la::Action>(x)) + shift);
    }
    c.expect(la::select_action(q, s, 0.0, rng) == before, "argmax moved under a row shift");
    c.expect(la::greedy_feasible_action(q, s) == feasible, "feasible argmax moved under a row shift");
  }
  c.note(fmt::format("max |Q| {:.3f} <= {:.1f} after 1e5 updates", peak, bound));
}

void transport(Criterion& c) {
  terrain::TerrainRecipe rc;
  rc.kind = terrain::RecipeKind::kTwoCorridor;
  rc.gentle_slope = 10;
  rc.steep_slope = 25;
  const auto t = terrain::make_synthetic(rc);
  const sim::AgentSpec cart{"cart", P("Ox-driven cart"), *t.start, *t.goal, nullptr};
  const sim::AgentSpec mule{"mule", P("Mule"), *t.start, *t.goal, nullptr};
  const auto run = sim::compare_transport(t.grid, {}, {}, cart, mule, 1e6, "two corridors");
  auto in_steep = [&](CellIndex x) { return x.row <= 3 && x.col >= 4 && x.col <= rc.corridor_length; };
  bool cart_steep = false, mule_steep = false;
  for (const auto& r : run.first_trace) cart_steep |= in_steep(r.cell);
  for (const auto& r : run.second_trace) mule_steep |= in_steep(r.cell);
  c.expect(!cart_steep, "cart entered the steep corridor");
  c.expect(mule_steep, "mule avoided the steep corridor");
  c.expect(run.second.duration < run.first.duration,
           fmt::format("mule {:.1f} s not faster than cart {:.1f} s", run.second.duration, run.first.duration));

  double worst = 0.0;
  for (const auto* spec : {&cart, &mule}) {
    sim::World w(t.grid, {});
    w.add_agent(*spec);
    w.run(1e6);
    const auto& a = w.agent(0);
    c.expect(a.mode == sim::Mode::kArrived, spec->id + " did not arrive");
    if (!a.plan) continue;
    const double err = std::abs(a.arrival_time - closed_form_time(t.grid, spec->profile, *a.plan));
    worst = std::max(worst, err);
    c.expect(err < 1e-6, fmt::format("{}: duration off by {:.3g} s", spec->id, err));
  }

  // 24 km at the mule's reference speed, against the 7.5-9 h band.
  const double nominal_h = 24000.0 / 0.96 / 3600.0;
  terrain::TerrainRecipe ramp;
  ramp.kind = terrain::RecipeKind::kRamp;
  ramp.nrows = 1;
  ramp.ncols = 801;
  ramp.slope_percent = 25;
  sim::World w(terrain::make_synthetic(ramp).grid, {});
  w.add_agent({"mule", P("Mule"), {0, 0}, {0, 800}, nullptr});
  w.run(1e6);
  const double sim_h = w.agent(0).arrival_time / 3600.0;
  for (const double h : {nominal_h, sim_h}) {
    c.expect(h < 7.5 && h >= 7.5 * 0.85, fmt::format("{:.3f} h outside [6.375, 7.5)", h));
  }
  c.note(fmt::format("cart {} vs mule {} ({:.1f}% shorter), max duration error {:.2g} s, 24 km mule {:.2f} h "
                     "(simulated {:.2f} h)",
                     scenario::format_hmm(run.first.duration), scenario::format_hmm(run.second.duration),
                     run.row.reduction_percent, worst, nominal_h, sim_h));
}

std::vector<std::string> pursuit_traces(const sim::World& w) {
  std::vector<std::string> out;
  for (const auto& a : w.agents()) {
    std::ostringstream s;
    sim::write_trace_csv(s, a.trace);
    out.push_back(s.str());
  }
  return out;
}

void pursuit(Criterion& c) {
  auto flat_case = [] {
    sim::World w(testing::flat_grid(5, 80), {});
    const auto h = w.add_agent({"hostile", P("Hostile"), {2, 0}, {2, 79}, nullptr});
    const auto t = w.add_agent({"elderly", P("Elderly"), {2, 5}, {2, 79}, nullptr});
    w.add_pursuit({h, t, 120.0, 1e9, 5.0});
    w.run(3000);
    return w;
  };
  const auto flat = flat_case();
  const auto& fp = flat.pursuits()[0];
  const double expected = (150.0 - 5.0) / (P("Hostile").s_flat - P("Elderly").s_flat);
  c.expect(fp.status == sim::PursuitStatus::kInterception, "flat pursuit did not end in interception");
  c.expect(std::abs(fp.end_time - expected) <= 0.05 * expected,
           fmt::format("interception at {:.1f} s, closed form {:.2f} s", fp.end_time, expected));
  c.expect(pursuit_traces(flat) == pursuit_traces(flat_case()), "flat pursuit not deterministic");

  auto ridge_case = [] {
    terrain::TerrainRecipe rc;
    rc.kind = terrain::RecipeKind::kRidge;
    rc.nrows = 7;
    rc.ncols = 60;
    rc.position = 24;
    rc.half_width = 6;
    rc.height = 40;
    sim::World w(terrain::make_synthetic(rc).grid, {});
    const auto h = w.add_agent({"hostile", P("Hostile"), {3, 0}, {3, 59}, nullptr});
    const auto t = w.add_agent({"walker", P("Fit adults"), {3, 14}, {3, 59}, nullptr});
    w.add_pursuit({h, t, 120.0, 1e9, 5.0});
    w.run(5000);
    return w;
  };
  const auto ridge = ridge_case();
  c.expect(ridge.pursuits()[0].status == sim::PursuitStatus::kAbandonedLos, "ridge pursuit not abandoned on sight");
  c.expect(pursuit_traces(ridge) == pursuit_traces(ridge_case()), "ridge pursuit not deterministic");

  sim::World zero(testing::flat_grid(5, 40), {});
  const auto h = zero.add_agent({"hostile", P("Hostile"), {2, 0}, {2, 39}, nullptr});
  const auto t = zero.add_agent({"elderly", P("Elderly"), {2, 20}, {2, 39}, nullptr});
  zero.add_pursuit({h, t, 120.0, 0.0, 5.0});
  zero.step();
  c.expect(zero.pursuits()[0].status == sim::PursuitStatus::kAbandonedEffort, "zero budget did not abandon");
  c.expect(zero.pursuits()[0].end_time == zero.options().dt, "zero budget abandoned after the first step");
  c.note(fmt::format("interception {:.0f} s vs {:.2f} s closed form, ridge abandoned at {:.0f} s, zero budget at "
                     "{:.0f} s",
                     fp.end_time, expected, ridge.pursuits()[0].end_time, zero.pursuits()[0].end_time));
}

void terrain_suite(Criterion& c) {
  std::mt19937_64 rng(808);
  int trips = 0;
  for (int k = 0; k < 40; ++k) {
    const auto g = testing::random_grid(rng, 1 + k % 9, 1 + k % 7, 0.5 + k * 1.25, 7.3, 0.1);
    const auto text = terrain::to_ascii_grid(g);
    std::istringstream in(text);
    const auto back = terrain::parse_ascii_grid(in);
    c.expect(terrain::to_ascii_grid(back) == text, "ascii round trip changed bytes");
    c.expect(back.values() == g.values(), "ascii round trip changed values");
    ++trips;
  }

  int pairs = 0;
  for (int k = 0; k < 4; ++k) {
    const auto g = testing::random_grid(rng, 24, 24, 30.0, 8.0, k % 2 ? 0.05 : 0.0);
    for (std::size_t i = 0; i < g.size(); i += 3) {
      for (std::size_t j = 0; j < g.size(); j += 5) {
        const auto a = g.unflat(i), b = g.unflat(j);
        if (!g.traversable(a) || !g.traversable(b)) continue;
        ++pairs;
        const bool ab = terrain::line_of_sight(g, a, b);
        c.expect(ab == terrain::line_of_sight(g, b, a), "line of sight not symmetric");
        c.expect(ab == testing::reference_los(g, a, b, terrain::kDefaultEyeHeight), "line of sight differs from reference");
      }
    }
  }

  // Every origin on a 32x32 grid, plus a few on 64x64.
  int origins = 0;
  const auto small = testing::random_grid(rng, 32, 32, 30.0, 9.0, 0.02);
  const auto big = testing::random_grid(rng, 64, 64, 30.0, 10.0, 0.02);
  auto check_viewshed = [&](const ElevationGrid& g, CellIndex o, double radius) {
    if (!g.traversable(o)) return;
    ++origins;
    const auto mask = terrain::viewshed(g, o, radius);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto cell = g.unflat(i);
      const double d = std::hypot((cell.row - o.row) * g.cellsize(), (cell.col - o.col) * g.cellsize());
      const bool want = d <= radius && g.traversable(cell) && terrain::line_of_sight(g, o, cell);
      c.expect(mask.at(cell) == want, fmt::format("viewshed mismatch at ({}, {})", cell.row, cell.col));
    }
  };
  for (std::size_t i = 0; i < small.size(); ++i) check_viewshed(small, small.unflat(i), 600.0);
  for (const CellIndex o : {CellIndex{31, 31}, CellIndex{0, 0}, CellIndex{63, 63}, CellIndex{10, 50}}) {
    check_viewshed(big, o, 1e9);
  }

  const auto ridge = testing::grid_from(1, 5, {0, 0, 50, 0, 0});
  c.expect(!terrain::line_of_sight(ridge, {0, 0}, {0, 4}, 1.7, 1.7), "ridge does not occlude");
  c.expect(terrain::line_of_sight(ridge, {0, 0}, {0, 2}, 1.7, 1.7), "ridge crest hidden from its foot");
  c.note(fmt::format("{} round trips, {} LOS pairs, {} viewshed origins", trips, pairs, origins));
}

void determinism(Criterion& c) {
  const auto base = fs::temp_directory_path() / "terramob_acceptance";
  fs::remove_all(base);
  int files = 0;
  for (const char* file : {"mixed_scenario.json", "pursuit_ridge.json", "two_corridor_transport.json"}) {
    std::vector<fs::path> dirs{base / (std::string(file) + ".1"), base / (std::string(file) + ".2")};
    for (const auto& d : dirs) {
      const std::string out = d.string();
      tm_sim_overrides o{};
      o.out_dir = out.c_str();
      o.strict = -1;
      o.has_seed = 1;
      o.seed = 2024;
      const auto s = tm_simulate((kFixtures + "/" + file).c_str(), &o, nullptr);
      c.expect(s == TM_OK, fmt::format("{}: {} ({})", file, tm_status_name(s), tm_last_error()));
    }
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
      if (!e.is_regular_file()) continue;
      ++files;
      const auto other = dirs[1] / fs::relative(e.path(), dirs[0]);
      c.expect(fs::exists(other) && slurp(e.path()) == slurp(other),
               fmt::format("{} differs between runs", fs::relative(e.path(), base).string()));
    }
  }
  fs::remove_all(base);
  c.note(fmt::format("{} output files byte-identical across two runs", files));
}

}  // namespace

int main() {
  const struct {
    const char* name;
    std::function<void(Criterion&)> run;
  } criteria[] = {
      {"mobility-table", mobility_table},   {"astar-optimality", astar_optimality},
      {"hybrid-contract", hybrid_contract}, {"q-learning-properties", q_properties},
      {"transport-comparison", transport},  {"pursuit-evasion", pursuit},
      {"terrain-los", terrain_suite},       {"determinism", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& cr : criteria) {
    ++index;
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !c.ok();
    std::printf("%s %d %s (%.1f s): %s\n", c.ok() ? "PASS" : "FAIL", index, cr.name, secs, c.summary().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
