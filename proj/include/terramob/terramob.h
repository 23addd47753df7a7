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

/* Plain C interface to terramob. Every call returns a tm_status; on failure
 * tm_last_error() describes the problem until the next call on the same thread.
 * Handles are opaque and owned by the caller (free with the matching *_free). */
#ifndef TERRAMOB_TERRAMOB_H_
#define TERRAMOB_TERRAMOB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TERRAMOB_BUILDING)
#    define TM_API __declspec(dllexport)
#  else
#    define TM_API __declspec(dllimport)
#  endif
#else
#  define TM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tm_status {
  TM_OK = 0,
  TM_INVALID_ARGUMENT = 1,
  TM_PARSE = 2,
  TM_NO_PATH = 3,
  TM_IO = 4,
  TM_SCHEMA = 5,
  TM_INTERNAL = 6
} tm_status;

typedef struct tm_grid tm_grid;
typedef struct tm_plan tm_plan;

TM_API const char* tm_version(void);
TM_API const char* tm_status_name(tm_status s);
/* Message of the last failed call on this thread ("" if none). */
TM_API const char* tm_last_error(void);
/* Releases strings returned through char** out-parameters. */
TM_API void tm_string_free(char* s);

/* ---- terrain ---------------------------------------------------------- */

TM_API tm_status tm_grid_load(const char* path, tm_grid** out);
/* recipe_json: {"kind": "flat" | "ramp" | "ridge" | "cone" | "two_corridor", ...}
 * with the same keys as a scenario's terrain.recipe. */
TM_API tm_status tm_grid_synthetic(const char* recipe_json, tm_grid** out);
TM_API void tm_grid_free(tm_grid* grid);
TM_API tm_status tm_grid_dims(const tm_grid* grid, int* nrows, int* ncols, double* cellsize);
TM_API tm_status tm_grid_elevation(const tm_grid* grid, int row, int col, double* elevation, int* is_nodata);
/* Recipe markers; name is "start" or "goal". TM_INVALID_ARGUMENT when absent. */
TM_API tm_status tm_grid_marker(const tm_grid* grid, const char* name, int* row, int* col);
TM_API tm_status tm_grid_save(const tm_grid* grid, const char* path);

TM_API tm_status tm_line_of_sight(const tm_grid* grid, int row0, int col0, int row1, int col1,
                                  double observer_height, double target_height, int* visible);

typedef enum tm_mask_format { TM_MASK_PGM = 0, TM_MASK_CSV = 1 } tm_mask_format;

TM_API tm_status tm_viewshed_write(const tm_grid* grid, int row, int col, double radius, double observer_height,
                                   tm_mask_format format, const char* path, size_t* visible_cells);

/* ---- agents ----------------------------------------------------------- */

TM_API size_t tm_profile_count(void);
/* Name of built-in profile i (static storage), NULL when out of range. */
TM_API const char* tm_profile_name(size_t i);
TM_API tm_status tm_profile_speed(const char* profile, double slope_percent, double* speed_mps, int* passable);

/* ---- planner ---------------------------------------------------------- */

/* Least-time plan; TM_NO_PATH when the goal is unreachable. The search
 * statistics are filled in either case when stats pointers are non-NULL. */
TM_API tm_status tm_plan_compute(const tm_grid* grid, const char* profile, int start_row, int start_col,
                                 int goal_row, int goal_col, tm_plan** out, uint64_t* nodes_expanded);
TM_API void tm_plan_free(tm_plan* plan);
TM_API tm_status tm_plan_stats(const tm_plan* plan, double* total_time, double* total_distance, size_t* cells);
TM_API tm_status tm_plan_cell(const tm_plan* plan, size_t i, int* row, int* col);
TM_API tm_status tm_plan_write_csv(const tm_plan* plan, const char* path);

/* ---- local adaptation ------------------------------------------------- */

typedef struct tm_train_summary {
  int episodes;
  int training_collisions;
  double heldout_success_rate; /* greedy rollouts on 200 fresh placements */
} tm_train_summary;

/* params_json: NULL or an object with the keys of a scenario's "training"
 * block. seed_override is used when has_seed is non-zero. */
TM_API tm_status tm_train(const char* params_json, int has_seed, uint64_t seed_override, const char* qtable_path,
                          const char* curve_path, tm_train_summary* summary);

/* ---- scenarios -------------------------------------------------------- */

typedef struct tm_sim_overrides {
  const char* out_dir; /* NULL: config outputs.dir, then $TERRAMOB_OUT, then "terramob_out" */
  int strict;          /* <0 keep config, 0 off, >0 on */
  double dt;           /* <=0 keep config */
  int has_seed;
  uint64_t seed;
} tm_sim_overrides;

/* Runs a scenario file and writes report.json, report.txt and traces/.
 * Returns TM_NO_PATH (after writing outputs) when strict and an agent has no
 * route. report_text may be NULL; otherwise it receives the rendered report. */
TM_API tm_status tm_simulate(const char* config_path, const tm_sim_overrides* overrides, char** report_text);

/* Renders a report.json file as plain text; TM_SCHEMA on mismatch. */
TM_API tm_status tm_report_render(const char* report_json_path, char** text);

#ifdef __cplusplus
}
#endif

#endif /* TERRAMOB_TERRAMOB_H_ */
