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

// terramob command-line driver. Links only the C interface.
//
// Exit codes: 0 ok, 1 internal or write failure, 2 no path, 3 bad input.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "terramob/terramob.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitNoPath = 2;
constexpr int kExitBadInput = 3;

int exit_code(tm_status s) {
  switch (s) {
    case TM_OK: return kExitOk;
    case TM_NO_PATH: return kExitNoPath;
    case TM_INVALID_ARGUMENT:
    case TM_PARSE:
    case TM_SCHEMA:
    case TM_IO: return kExitBadInput;
    case TM_INTERNAL: break;
  }
  return kExitFailure;
}

int report_error(tm_status s) {
  std::fprintf(stderr, "terramob: %s: %s\n", tm_status_name(s), tm_last_error());
  return exit_code(s);
}

struct Cell {
  int row = 0;
  int col = 0;
  std::string marker;  // "start" / "goal" of a synthetic terrain
};

// "r,c" or a recipe marker name.
std::optional<Cell> parse_cell(const std::string& text) {
  if (text == "start" || text == "goal") return Cell{0, 0, text};
  Cell c;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d,%d%c", &c.row, &c.col, &tail) != 2) return std::nullopt;
  return c;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// An .asc grid, or a .json file holding a terrain recipe.
tm_status open_terrain(const std::string& path, tm_grid** grid) {
  if (!ends_with(path, ".json")) return tm_grid_load(path.c_str(), grid);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "terramob: cannot open %s\n", path.c_str());
    return TM_IO;
  }
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return tm_grid_synthetic(body.c_str(), grid);
}

tm_status resolve_cell(const tm_grid* grid, Cell& c) {
  if (c.marker.empty()) return TM_OK;
  return tm_grid_marker(grid, c.marker.c_str(), &c.row, &c.col);
}

class GridHandle {
 public:
  ~GridHandle() { tm_grid_free(grid_); }
  tm_grid** out() { return &grid_; }
  const tm_grid* get() const { return grid_; }

 private:
  tm_grid* grid_ = nullptr;
};

int cmd_plan(const std::string& terrain, const std::string& profile, Cell start, Cell goal,
             const std::string& out) {
  GridHandle grid;
  tm_status s = open_terrain(terrain, grid.out());
  if (s != TM_OK) return report_error(s);
  if ((s = resolve_cell(grid.get(), start)) != TM_OK) return report_error(s);
  if ((s = resolve_cell(grid.get(), goal)) != TM_OK) return report_error(s);
  tm_plan* plan = nullptr;
  uint64_t expanded = 0;
  s = tm_plan_compute(grid.get(), profile.c_str(), start.row, start.col, goal.row, goal.col, &plan, &expanded);
  if (s != TM_OK) {
    const int code = report_error(s);
    std::printf("nodes_expanded %llu\n", static_cast<unsigned long long>(expanded));
    return code;
  }
  double time = 0, distance = 0;
  size_t cells = 0;
  tm_plan_stats(plan, &time, &distance, &cells);
  std::printf("total_time %.6f s\ntotal_distance %.3f m\nnodes_expanded %llu\ncells %zu\n", time, distance,
              static_cast<unsigned long long>(expanded), cells);
  if (!out.empty()) s = tm_plan_write_csv(plan, out.c_str());
  tm_plan_free(plan);
  return s == TM_OK ? kExitOk : report_error(s);
}

int cmd_train(const std::string& config, std::optional<uint64_t> seed, const std::string& out_dir) {
  std::string params;
  if (!config.empty()) {
    std::ifstream in(config, std::ios::binary);
    if (!in) {
      std::fprintf(stderr, "terramob: cannot open %s\n", config.c_str());
      return kExitBadInput;
    }
    params.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "terramob: cannot create %s: %s\n", out_dir.c_str(), ec.message().c_str());
    return kExitFailure;
  }
  const std::string qtable = out_dir + "/qtable.txt";
  const std::string curve = out_dir + "/curve.csv";
  tm_train_summary summary{};
  const tm_status s = tm_train(params.empty() ? nullptr : params.c_str(), seed ? 1 : 0, seed.value_or(0),
                               qtable.c_str(), curve.c_str(), &summary);
  if (s != TM_OK) return report_error(s);
  std::printf("episodes %d\ntraining_collisions %d\nheldout_success %.3f\nqtable %s\ncurve %s\n", summary.episodes,
              summary.training_collisions, summary.heldout_success_rate, qtable.c_str(), curve.c_str());
  return kExitOk;
}

int cmd_simulate(const std::string& config, const tm_sim_overrides& o) {
  char* text = nullptr;
  const tm_status s = tm_simulate(config.c_str(), &o, &text);
  if (text) {
    std::fputs(text, stdout);
    tm_string_free(text);
  }
  return s == TM_OK ? kExitOk : report_error(s);
}

int cmd_report(const std::string& path) {
  char* text = nullptr;
  const tm_status s = tm_report_render(path.c_str(), &text);
  if (s != TM_OK) return report_error(s);
  std::fputs(text, stdout);
  tm_string_free(text);
  return kExitOk;
}

int cmd_viewshed(const std::string& terrain, Cell origin, double radius, double eye, const std::string& out) {
  if (!ends_with(out, ".csv") && !ends_with(out, ".pgm")) {
    std::fprintf(stderr, "terramob: --out must end in .pgm or .csv\n");
    return kExitBadInput;
  }
  GridHandle grid;
  tm_status s = open_terrain(terrain, grid.out());
  if (s != TM_OK) return report_error(s);
  if ((s = resolve_cell(grid.get(), origin)) != TM_OK) return report_error(s);
  size_t visible = 0;
  const auto format = ends_with(out, ".csv") ? TM_MASK_CSV : TM_MASK_PGM;
  s = tm_viewshed_write(grid.get(), origin.row, origin.col, radius, eye, format, out.c_str(), &visible);
  if (s != TM_OK) return report_error(s);
  std::printf("visible_cells %zu\n", visible);
  return kExitOk;
}

// Adds an "r,c" option that fails parsing with a clear message.
CLI::Option* add_cell(CLI::App* app, const std::string& flag, std::string& text, const std::string& what) {
  return app->add_option(flag, text, what + " as row,col (or start/goal for recipe terrain)")
      ->check([](const std::string& v) { return parse_cell(v) ? std::string() : "expected row,col"; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"terramob: terrain-aware agent mobility simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tm_version());

  std::string terrain, profile = "Fit adults", start, goal, out, config;
  std::optional<uint64_t> seed;
  bool strict = false;
  double dt = 0.0, radius = 1e9, eye = 1.7;

  auto* plan = app.add_subcommand("plan", "least-time path between two cells");
  plan->add_option("--terrain", terrain, ".asc grid or terrain recipe .json")->required();
  plan->add_option("--profile", profile, "built-in agent profile")->capture_default_str();
  add_cell(plan, "--start", start, "start cell")->required();
  add_cell(plan, "--goal", goal, "goal cell")->required();
  plan->add_option("--out", out, "plan CSV path");

  auto* train = app.add_subcommand("train", "train the bypass Q-table on randomized corridors");
  train->add_option("--config", config, "JSON object with learning parameters and reward weights");
  train->add_option("--seed", seed, "training seed");
  train->add_option("--out", out, "output directory (default $TERRAMOB_OUT or .)");

  auto* simulate = app.add_subcommand("simulate", "run a scenario and write report and traces");
  simulate->add_option("--config", config, "scenario JSON")->required();
  simulate->add_option("--out", out, "output directory");
  simulate->add_flag("--strict", strict, "exit 2 when an agent has no path");
  simulate->add_option("--dt", dt, "time step override, seconds")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "seed override");

  std::string report_path;
  auto* report = app.add_subcommand("report", "render report.json as text tables");
  report->add_option("report", report_path, "report.json")->required();

  auto* view = app.add_subcommand("viewshed", "visibility mask from one cell");
  view->add_option("--terrain", terrain, ".asc grid or terrain recipe .json")->required();
  add_cell(view, "--start", start, "observer cell")->required();
  view->add_option("--radius", radius, "radius in meters")->check(CLI::NonNegativeNumber);
  view->add_option("--eye", eye, "observer and target height above ground, meters")->capture_default_str();
  view->add_option("--out", out, "mask path (.pgm or .csv)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  if (*plan) return cmd_plan(terrain, profile, *parse_cell(start), *parse_cell(goal), out);
  if (*train) {
    if (out.empty()) {
      const char* env = std::getenv("TERRAMOB_OUT");
      out = env && *env ? env : ".";
    }
    return cmd_train(config, seed, out);
  }
  if (*simulate) {
    tm_sim_overrides o{};
    o.out_dir = out.empty() ? nullptr : out.c_str();
    o.strict = strict ? 1 : -1;
    o.dt = dt;
    o.has_seed = seed ? 1 : 0;
    o.seed = seed.value_or(0);
    return cmd_simulate(config, o);
  }
  if (*report) return cmd_report(report_path);
  if (*view) return cmd_viewshed(terrain, *parse_cell(start), radius, eye, out);
  return kExitBadInput;
}
