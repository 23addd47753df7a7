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

#define TERRAMOB_BUILDING
#include "terramob/terramob.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <new>
#include <optional>
#include <string>

#include "terramob/agents.hpp"
#include "terramob/error.hpp"
#include "terramob/local_adapt.hpp"
#include "terramob/planner.hpp"
#include "terramob/scenario.hpp"
#include "terramob/terrain.hpp"

using namespace terramob;

struct tm_grid {
  terrain::ElevationGrid grid;
  std::optional<terrain::CellIndex> start;
  std::optional<terrain::CellIndex> goal;
};

struct tm_plan {
  const terrain::ElevationGrid* grid;  // the caller keeps the grid alive while using the plan
  planner::PathPlan plan;
};

namespace {

thread_local std::string g_last_error;

tm_status fail(tm_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
tm_status guarded(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const Error& e) {
    return fail(static_cast<tm_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TM_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TM_INTERNAL, e.what());
  }
}

tm_status null_arg(const char* name) { return fail(TM_INVALID_ARGUMENT, std::string(name) + " is NULL"); }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::ofstream open_out(const char* path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, std::string("cannot write ") + path);
  return out;
}

void finish(std::ofstream& out, const char* path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, std::string("write failed: ") + path);
}

}  // namespace

extern "C" {

const char* tm_version(void) { return "1.0.0"; }

const char* tm_status_name(tm_status s) {
  switch (s) {
    case TM_OK: return "ok";
    case TM_INVALID_ARGUMENT: return "invalid argument";
    case TM_PARSE: return "parse error";
    case TM_NO_PATH: return "no path";
    case TM_IO: return "i/o error";
    case TM_SCHEMA: return "schema mismatch";
    case TM_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* tm_last_error(void) { return g_last_error.c_str(); }

void tm_string_free(char* s) { std::free(s); }

tm_status tm_grid_load(const char* path, tm_grid** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new tm_grid{terrain::load_ascii_grid(path), std::nullopt, std::nullopt};
    return TM_OK;
  });
}

tm_status tm_grid_synthetic(const char* recipe_json, tm_grid** out) {
  if (!recipe_json) return null_arg("recipe_json");
  if (!out) return null_arg("out");
  return guarded([&] {
    auto s = terrain::make_synthetic(scenario::parse_recipe(recipe_json));
    *out = new tm_grid{std::move(s.grid), s.start, s.goal};
    return TM_OK;
  });
}

void tm_grid_free(tm_grid* grid) { delete grid; }

tm_status tm_grid_dims(const tm_grid* grid, int* nrows, int* ncols, double* cellsize) {
  if (!grid) return null_arg("grid");
  if (nrows) *nrows = grid->grid.nrows();
  if (ncols) *ncols = grid->grid.ncols();
  if (cellsize) *cellsize = grid->grid.cellsize();
  return TM_OK;
}

tm_status tm_grid_elevation(const tm_grid* grid, int row, int col, double* elevation, int* is_nodata) {
  if (!grid) return null_arg("grid");
  const terrain::CellIndex c{row, col};
  if (!grid->grid.in_bounds(c)) return fail(TM_INVALID_ARGUMENT, "cell out of bounds");
  if (elevation) *elevation = grid->grid.elevation(c);
  if (is_nodata) *is_nodata = grid->grid.is_nodata(c) ? 1 : 0;
  return TM_OK;
}

tm_status tm_grid_marker(const tm_grid* grid, const char* name, int* row, int* col) {
  if (!grid) return null_arg("grid");
  if (!name) return null_arg("name");
  const std::string n = name;
  const auto& m = n == "start" ? grid->start : n == "goal" ? grid->goal : std::optional<terrain::CellIndex>{};
  if (!m) return fail(TM_INVALID_ARGUMENT, "grid has no marker '" + n + "'");
  if (row) *row = m->row;
  if (col) *col = m->col;
  return TM_OK;
}

tm_status tm_grid_save(const tm_grid* grid, const char* path) {
  if (!grid) return null_arg("grid");
  if (!path) return null_arg("path");
  return guarded([&] {
    auto out = open_out(path);
    terrain::write_ascii_grid(out, grid->grid);
    finish(out, path);
    return TM_OK;
  });
}

tm_status tm_line_of_sight(const tm_grid* grid, int row0, int col0, int row1, int col1, double observer_height,
                           double target_height, int* visible) {
  if (!grid) return null_arg("grid");
  if (!visible) return null_arg("visible");
  return guarded([&] {
    *visible = terrain::line_of_sight(grid->grid, {row0, col0}, {row1, col1}, observer_height, target_height) ? 1 : 0;
    return TM_OK;
  });
}

tm_status tm_viewshed_write(const tm_grid* grid, int row, int col, double radius, double observer_height,
                            tm_mask_format format, const char* path, size_t* visible_cells) {
  if (!grid) return null_arg("grid");
  if (!path) return null_arg("path");
  if (format != TM_MASK_PGM && format != TM_MASK_CSV) return fail(TM_INVALID_ARGUMENT, "unknown mask format");
  return guarded([&] {
    const auto mask = terrain::viewshed(grid->grid, {row, col}, radius, observer_height);
    auto out = open_out(path);
    if (format == TM_MASK_PGM) terrain::write_mask_pgm(out, mask);
    else terrain::write_mask_csv(out, mask);
    finish(out, path);
    if (visible_cells) *visible_cells = mask.count();
    return TM_OK;
  });
}

size_t tm_profile_count(void) { return agents::builtin_profiles().size(); }

const char* tm_profile_name(size_t i) {
  const auto& all = agents::builtin_profiles();
  return i < all.size() ? all[i].name.c_str() : nullptr;
}

tm_status tm_profile_speed(const char* profile, double slope_percent, double* speed_mps, int* passable) {
  if (!profile) return null_arg("profile");
  return guarded([&] {
    const auto r = agents::speed_at(agents::builtin_profile(profile), slope_percent);
    if (speed_mps) *speed_mps = r.speed;
    if (passable) *passable = r.passable ? 1 : 0;
    return TM_OK;
  });
}

tm_status tm_plan_compute(const tm_grid* grid, const char* profile, int start_row, int start_col, int goal_row,
                          int goal_col, tm_plan** out, uint64_t* nodes_expanded) {
  if (!grid) return null_arg("grid");
  if (!profile) return null_arg("profile");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = nullptr;
    auto r = planner::astar(grid->grid, agents::builtin_profile(profile), {start_row, start_col},
                            {goal_row, goal_col});
    if (nodes_expanded) *nodes_expanded = r.stats.nodes_expanded;
    if (!r.plan) {
      return fail(TM_NO_PATH, "no path from (" + std::to_string(start_row) + "," + std::to_string(start_col) +
                                  ") to (" + std::to_string(goal_row) + "," + std::to_string(goal_col) +
                                  ") for " + profile);
    }
    *out = new tm_plan{&grid->grid, std::move(*r.plan)};
    return TM_OK;
  });
}

void tm_plan_free(tm_plan* plan) { delete plan; }

tm_status tm_plan_stats(const tm_plan* plan, double* total_time, double* total_distance, size_t* cells) {
  if (!plan) return null_arg("plan");
  if (total_time) *total_time = plan->plan.total_time;
  if (total_distance) *total_distance = plan->plan.total_distance;
  if (cells) *cells = plan->plan.size();
  return TM_OK;
}

tm_status tm_plan_cell(const tm_plan* plan, size_t i, int* row, int* col) {
  if (!plan) return null_arg("plan");
  if (i >= plan->plan.size()) return fail(TM_INVALID_ARGUMENT, "plan index out of range");
  if (row) *row = plan->plan.waypoints[i].row;
  if (col) *col = plan->plan.waypoints[i].col;
  return TM_OK;
}

tm_status tm_plan_write_csv(const tm_plan* plan, const char* path) {
  if (!plan) return null_arg("plan");
  if (!path) return null_arg("path");
  return guarded([&] {
    auto out = open_out(path);
    planner::write_plan_csv(out, *plan->grid, plan->plan);
    finish(out, path);
    return TM_OK;
  });
}

tm_status tm_train(const char* params_json, int has_seed, uint64_t seed_override, const char* qtable_path,
                   const char* curve_path, tm_train_summary* summary) {
  if (!qtable_path) return null_arg("qtable_path");
  return guarded([&] {
    local_adapt::LearningParams learning;
    local_adapt::RewardWeights reward;
    if (params_json) scenario::parse_training(params_json, learning, reward);
    if (has_seed) learning.seed = seed_override;
    const local_adapt::CorridorEnv env;
    const auto result = local_adapt::train_bypass(env, reward, learning);
    local_adapt::save_qtable(qtable_path, result.table);
    if (curve_path) {
      auto out = open_out(curve_path);
      local_adapt::write_curve_csv(out, result.curve);
      finish(out, curve_path);
    }
    if (summary) {
      // Held-out placements come from a stream disjoint from the training seed.
      const auto eval = local_adapt::evaluate_bypass(result.table, env, reward, 200, learning.seed ^ 0x9e3779b97f4a7c15ULL);
      summary->episodes = learning.episodes;
      summary->training_collisions = result.total_collisions;
      summary->heldout_success_rate = eval.success_rate();
    }
    return TM_OK;
  });
}

tm_status tm_simulate(const char* config_path, const tm_sim_overrides* overrides, char** report_text) {
  if (!config_path) return null_arg("config_path");
  return guarded([&] {
    auto config = scenario::load_config(config_path);
    std::string dir = config.output_dir;
    if (overrides) {
      if (overrides->dt > 0.0) config.sim.dt = overrides->dt;
      if (overrides->strict >= 0) config.sim.strict = overrides->strict > 0;
      if (overrides->has_seed) config.set_seed(overrides->seed);
      if (overrides->out_dir) dir = overrides->out_dir;
    }
    if (dir.empty()) {
      const char* env = std::getenv("TERRAMOB_OUT");
      dir = env && *env ? env : "terramob_out";
    }
    const auto result = scenario::run_scenario(config);
    scenario::write_outputs(result, dir);
    if (report_text) *report_text = dup_string(scenario::render_report(result.report));
    if (config.sim.strict && result.any_no_path) {
      return fail(TM_NO_PATH, "at least one agent has no path (strict mode)");
    }
    return TM_OK;
  });
}

tm_status tm_report_render(const char* report_json_path, char** text) {
  if (!report_json_path) return null_arg("report_json_path");
  if (!text) return null_arg("text");
  return guarded([&] {
    std::ifstream in(report_json_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, std::string("cannot open ") + report_json_path);
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    *text = dup_string(scenario::render_report(scenario::report_from_json(body)));
    return TM_OK;
  });
}

}  // extern "C"
