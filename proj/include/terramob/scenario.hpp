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
#include <optional>
#include <string>
#include <vector>

#include "terramob/agents.hpp"
#include "terramob/local_adapt.hpp"
#include "terramob/planner.hpp"
#include "terramob/sim.hpp"
#include "terramob/terrain.hpp"

// JSON scenario documents, their execution, and the report they produce.
// The config schema is described in docs/scenario-format.md.
namespace terramob::scenario {

using terrain::CellIndex;

struct AgentEntry {
  std::string id;
  std::string profile;
  CellIndex start;
  CellIndex goal;
  std::string qtable_path;  // empty: use the scenario's trained table
};

struct PursuitEntry {
  std::string pursuer;
  std::string target;
  double los_loss_limit = 120.0;
  double effort_budget = 1e9;
  double capture_radius = 5.0;
};

struct ComparisonEntry {
  std::string route;
  std::string first;   // agent ids; `first` is the reference mode
  std::string second;
};

struct SimSettings {
  double dt = 1.0;
  double max_sim_time = 86400.0;
  std::uint64_t seed = 42;
  planner::CostMode cost_mode = planner::CostMode::kTime;
  bool strict = false;
};

struct ScenarioConfig {
  std::string base_dir;  // relative paths resolve against it
  std::string terrain_path;
  std::optional<terrain::TerrainRecipe> recipe;
  std::vector<agents::AgentProfile> profiles;  // custom profiles; built-ins are always known
  std::vector<AgentEntry> agents;
  std::vector<sim::Obstacle> obstacles;
  std::vector<PursuitEntry> pursuits;
  std::vector<ComparisonEntry> comparisons;
  SimSettings sim;
  local_adapt::RewardWeights reward;
  local_adapt::LearningParams learning;
  bool training_seed_set = false;  // false: learning.seed follows sim.seed
  local_adapt::CorridorEnv corridor;
  std::string output_dir;

  const agents::AgentProfile& profile(const std::string& name) const;
  void set_seed(std::uint64_t seed);
};

// Throws Error(kSchema) for structural problems, Error(kInvalidArgument) for
// out-of-range values, Error(kParse) for malformed JSON.
ScenarioConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& path);

// Standalone pieces of the config schema (same keys and errors).
terrain::TerrainRecipe parse_recipe(const std::string& json_text);
void parse_training(const std::string& json_text, local_adapt::LearningParams& learning,
                    local_adapt::RewardWeights& reward);

struct ModeRow {
  std::string mode;
  double slope_percent = 0.0;  // reference slope of the speed law
  double load_kg = 0.0;
  int vessels = 0;
  double avg_speed = 0.0;
  double duration = 0.0;
  double distance = 0.0;
};

struct PursuitRow {
  std::string pursuer;
  std::string target;
  std::string status;
  double end_time = 0.0;
  std::size_t splices = 0;
};

struct Report {
  std::uint64_t seed = 0;
  double dt = 1.0;
  double clock = 0.0;
  std::vector<sim::AgentSummary> agents;
  std::vector<PursuitRow> pursuits;
  std::vector<ModeRow> modes;
  std::vector<sim::TransportRow> transport;
};

struct Trace {
  std::string agent_id;
  std::vector<sim::TraceRecord> records;
};

struct ScenarioResult {
  Report report;
  std::vector<Trace> traces;
  bool any_no_path = false;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

std::string report_to_json(const Report& r);
// Throws Error(kSchema) when the document is not a report.
Report report_from_json(const std::string& text);
// Plain-text tables: agents, pursuits, transport comparison.
std::string render_report(const Report& r);

// h:mm with zero-padded hours, rounded to the nearest minute.
std::string format_hmm(double seconds);

// Writes report.json, report.txt and traces/<agent>.csv under dir.
void write_outputs(const ScenarioResult& result, const std::string& dir);

}  // namespace terramob::scenario
