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

#include "terramob/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "terramob/error.hpp"

namespace terramob::scenario {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kSchema, where + ": " + what);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) schema_error(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      schema_error(where, "unknown key '" + key + "'");
    }
  }
}

double get_number(const json& j, const char* key, const std::string& where, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) schema_error(where + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, const std::string& where, int fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) schema_error(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& where, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) schema_error(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) schema_error(where, std::string("missing '") + key + "'");
  return get_string(j, key, where, "");
}

CellIndex parse_cell(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    schema_error(where, "expected [row, col]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

terrain::RecipeKind recipe_kind(const std::string& s, const std::string& where) {
  static const std::map<std::string, terrain::RecipeKind> kKinds = {
      {"flat", terrain::RecipeKind::kFlat},   {"ramp", terrain::RecipeKind::kRamp},
      {"ridge", terrain::RecipeKind::kRidge}, {"cone", terrain::RecipeKind::kCone},
      {"two_corridor", terrain::RecipeKind::kTwoCorridor}};
  const auto it = kKinds.find(s);
  if (it == kKinds.end()) schema_error(where, "unknown recipe kind '" + s + "'");
  return it->second;
}

terrain::TerrainRecipe parse_recipe(const json& j) {
  const std::string where = "terrain.recipe";
  check_keys(j, where,
             {"kind", "nrows", "ncols", "cellsize", "xll", "yll", "height", "slope_percent", "axis", "position",
              "half_width", "peak", "radius", "gentle_slope", "steep_slope", "corridor_length", "detour_depth"});
  terrain::TerrainRecipe r;
  r.kind = recipe_kind(require_string(j, "kind", where), where + ".kind");
  r.nrows = get_int(j, "nrows", where, r.nrows);
  r.ncols = get_int(j, "ncols", where, r.ncols);
  r.cellsize = get_number(j, "cellsize", where, r.cellsize);
  r.xll = get_number(j, "xll", where, r.xll);
  r.yll = get_number(j, "yll", where, r.yll);
  r.height = get_number(j, "height", where, r.height);
  r.slope_percent = get_number(j, "slope_percent", where, r.slope_percent);
  const std::string axis = get_string(j, "axis", where, std::string(1, r.axis));
  if (axis != "x" && axis != "y") schema_error(where + ".axis", "expected \"x\" or \"y\"");
  r.axis = axis[0];
  r.position = get_int(j, "position", where, r.position);
  r.half_width = get_number(j, "half_width", where, r.half_width);
  r.peak = get_number(j, "peak", where, r.peak);
  r.radius = get_number(j, "radius", where, r.radius);
  r.gentle_slope = get_number(j, "gentle_slope", where, r.gentle_slope);
  r.steep_slope = get_number(j, "steep_slope", where, r.steep_slope);
  r.corridor_length = get_int(j, "corridor_length", where, r.corridor_length);
  r.detour_depth = get_int(j, "detour_depth", where, r.detour_depth);
  return r;
}

agents::AgentProfile parse_profile(const json& j, const std::string& where) {
  check_keys(j, where,
             {"name", "base", "kind", "s_flat", "reduction_at_ref", "ref_slope", "r_load", "r_slope_at_ref",
              "load_kg", "vessels", "max_slope", "body_radius", "role", "downhill"});
  agents::AgentProfile p;
  if (j.contains("base")) p = agents::builtin_profile(require_string(j, "base", where));
  p.name = require_string(j, "name", where);
  if (j.contains("kind")) {
    const auto k = require_string(j, "kind", where);
    if (k == "human") p.kind = agents::AgentKind::kHuman;
    else if (k == "animal") p.kind = agents::AgentKind::kAnimal;
    else schema_error(where + ".kind", "expected \"human\" or \"animal\"");
  }
  p.s_flat = get_number(j, "s_flat", where, p.s_flat);
  p.reduction_at_ref = get_number(j, "reduction_at_ref", where, p.reduction_at_ref);
  p.ref_slope = get_number(j, "ref_slope", where, p.ref_slope);
  p.r_load = get_number(j, "r_load", where, p.r_load);
  p.r_slope_at_ref = get_number(j, "r_slope_at_ref", where, p.r_slope_at_ref);
  p.load_kg = get_number(j, "load_kg", where, p.load_kg);
  p.vessels = get_int(j, "vessels", where, p.vessels);
  p.max_slope = get_number(j, "max_slope", where, p.max_slope);
  p.body_radius = get_number(j, "body_radius", where, p.body_radius);
  if (j.contains("role")) {
    const auto r = require_string(j, "role", where);
    if (r == "civilian") p.role = agents::Role::kCivilian;
    else if (r == "hostile") p.role = agents::Role::kHostile;
    else if (r == "transport") p.role = agents::Role::kTransport;
    else schema_error(where + ".role", "expected civilian, hostile or transport");
  }
  if (j.contains("downhill")) {
    const auto d = require_string(j, "downhill", where);
    if (d == "symmetric") p.downhill = agents::DownhillMode::kSymmetric;
    else if (d == "flat") p.downhill = agents::DownhillMode::kFlat;
    else schema_error(where + ".downhill", "expected \"symmetric\" or \"flat\"");
  }
  agents::validate(p);
  return p;
}

sim::Obstacle parse_obstacle(const json& j, const std::string& where) {
  check_keys(j, where, {"id", "cells", "rect", "schedule"});
  sim::Obstacle o;
  o.id = get_string(j, "id", where, where);
  if (j.contains("cells")) {
    if (!j.at("cells").is_array()) schema_error(where + ".cells", "expected an array of [row, col]");
    for (std::size_t k = 0; k < j.at("cells").size(); ++k) {
      o.footprint.push_back(parse_cell(j.at("cells")[k], fmt::format("{}.cells[{}]", where, k)));
    }
  }
  if (j.contains("rect")) {
    const auto& r = j.at("rect");
    check_keys(r, where + ".rect", {"row", "col", "rows", "cols"});
    const int row = get_int(r, "row", where + ".rect", 0), col = get_int(r, "col", where + ".rect", 0);
    const int rows = get_int(r, "rows", where + ".rect", 1), cols = get_int(r, "cols", where + ".rect", 1);
    if (rows < 1 || cols < 1) throw_invalid(where + ".rect: rows and cols must be >= 1");
    for (int dr = 0; dr < rows; ++dr)
      for (int dc = 0; dc < cols; ++dc) o.footprint.push_back({row + dr, col + dc});
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (!s.is_array()) schema_error(where + ".schedule", "expected an array of [appear, disappear]");
    for (const auto& iv : s) {
      if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
        schema_error(where + ".schedule", "expected [appear, disappear] pairs of seconds");
      }
      o.schedule.emplace_back(iv[0].get<double>(), iv[1].get<double>());
    }
  }
  return o;
}

// Returns true when the block sets its own seed.
bool apply_training(const json& tr, local_adapt::LearningParams& p, local_adapt::RewardWeights& r) {
  const std::string w = "training";
  check_keys(tr, w,
             {"alpha", "gamma", "epsilon_start", "epsilon_end", "epsilon_decay_episodes", "episodes",
              "max_steps_per_episode", "seed", "r_coll", "r_delay", "r_dev", "r_rejoin", "r_clear"});
  p.alpha = get_number(tr, "alpha", w, p.alpha);
  p.gamma = get_number(tr, "gamma", w, p.gamma);
  p.epsilon_start = get_number(tr, "epsilon_start", w, p.epsilon_start);
  p.epsilon_end = get_number(tr, "epsilon_end", w, p.epsilon_end);
  p.epsilon_decay_episodes = get_int(tr, "epsilon_decay_episodes", w, p.epsilon_decay_episodes);
  p.episodes = get_int(tr, "episodes", w, p.episodes);
  p.max_steps_per_episode = get_int(tr, "max_steps_per_episode", w, p.max_steps_per_episode);
  r.r_coll = get_number(tr, "r_coll", w, r.r_coll);
  r.r_delay = get_number(tr, "r_delay", w, r.r_delay);
  r.r_dev = get_number(tr, "r_dev", w, r.r_dev);
  r.r_rejoin = get_number(tr, "r_rejoin", w, r.r_rejoin);
  r.r_clear = get_number(tr, "r_clear", w, r.r_clear);
  if (!tr.contains("seed")) return false;
  if (!tr.at("seed").is_number_unsigned()) schema_error("training.seed", "expected a non-negative integer");
  p.seed = tr.at("seed").get<std::uint64_t>();
  return true;
}

json parse_document(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

}  // namespace

const agents::AgentProfile& ScenarioConfig::profile(const std::string& name) const {
  for (const auto& p : profiles) {
    if (p.name == name) return p;
  }
  return agents::builtin_profile(name);
}

ScenarioConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  const json doc = parse_document(json_text, "config");
  check_keys(doc, "config",
             {"terrain", "profiles", "agents", "obstacles", "pursuit", "transport_comparison", "sim", "training",
              "outputs"});
  ScenarioConfig c;
  c.base_dir = base_dir;

  if (!doc.contains("terrain")) schema_error("config", "missing 'terrain'");
  const auto& t = doc.at("terrain");
  check_keys(t, "terrain", {"path", "recipe"});
  if (t.contains("path") == t.contains("recipe")) schema_error("terrain", "give exactly one of 'path' or 'recipe'");
  if (t.contains("path")) c.terrain_path = resolve(base_dir, require_string(t, "path", "terrain"));
  else c.recipe = parse_recipe(t.at("recipe"));

  if (doc.contains("sim")) {
    const auto& s = doc.at("sim");
    check_keys(s, "sim", {"dt", "max_sim_time", "seed", "cost_mode", "strict"});
    c.sim.dt = get_number(s, "dt", "sim", c.sim.dt);
    c.sim.max_sim_time = get_number(s, "max_sim_time", "sim", c.sim.max_sim_time);
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) schema_error("sim.seed", "expected a non-negative integer");
      c.sim.seed = s.at("seed").get<std::uint64_t>();
    }
    const auto mode = get_string(s, "cost_mode", "sim", "time");
    if (mode == "time") c.sim.cost_mode = planner::CostMode::kTime;
    else if (mode == "distance") c.sim.cost_mode = planner::CostMode::kDistance;
    else schema_error("sim.cost_mode", "expected \"time\" or \"distance\"");
    if (s.contains("strict")) {
      if (!s.at("strict").is_boolean()) schema_error("sim.strict", "expected a boolean");
      c.sim.strict = s.at("strict").get<bool>();
    }
  } else {
    schema_error("config", "missing 'sim' (the seed must be explicit)");
  }
  if (!doc.at("sim").contains("seed")) schema_error("sim", "missing 'seed'");
  if (!(c.sim.dt > 0.0)) throw_invalid("sim.dt must be positive");
  if (!(c.sim.max_sim_time > 0.0)) throw_invalid("sim.max_sim_time must be positive");
  c.learning.seed = c.sim.seed;

  if (doc.contains("profiles")) {
    const auto& ps = doc.at("profiles");
    if (!ps.is_array()) schema_error("profiles", "expected an array");
    for (std::size_t k = 0; k < ps.size(); ++k) c.profiles.push_back(parse_profile(ps[k], fmt::format("profiles[{}]", k)));
  }

  if (!doc.contains("agents") || !doc.at("agents").is_array()) schema_error("config", "'agents' must be an array");
  std::set<std::string> ids;
  for (std::size_t k = 0; k < doc.at("agents").size(); ++k) {
    const auto& a = doc.at("agents")[k];
    const std::string where = fmt::format("agents[{}]", k);
    check_keys(a, where, {"id", "profile", "start", "goal", "qtable"});
    AgentEntry e;
    e.id = require_string(a, "id", where);
    if (!ids.insert(e.id).second) throw_invalid(where + ": duplicate agent id '" + e.id + "'");
    e.profile = require_string(a, "profile", where);
    c.profile(e.profile);  // throws for unknown names
    for (const char* key : {"start", "goal"}) {
      if (!a.contains(key)) schema_error(where, std::string("missing '") + key + "'");
      const auto& v = a.at(key);
      CellIndex cell;
      if (v.is_string()) {
        // "start" / "goal" markers of a synthetic terrain.
        if (!c.recipe) schema_error(where + "." + key, "markers need a recipe terrain");
        const auto synth = terrain::make_synthetic(*c.recipe);
        const auto name = v.get<std::string>();
        const auto& marker = name == "start" ? synth.start : synth.goal;
        if ((name != "start" && name != "goal") || !marker) {
          schema_error(where + "." + key, "recipe has no marker '" + name + "'");
        }
        cell = *marker;
      } else {
        cell = parse_cell(v, where + "." + key);
      }
      (std::string(key) == "start" ? e.start : e.goal) = cell;
    }
    e.qtable_path = resolve(base_dir, get_string(a, "qtable", where, ""));
    c.agents.push_back(std::move(e));
  }

  if (doc.contains("obstacles")) {
    const auto& os = doc.at("obstacles");
    if (!os.is_array()) schema_error("obstacles", "expected an array");
    for (std::size_t k = 0; k < os.size(); ++k) c.obstacles.push_back(parse_obstacle(os[k], fmt::format("obstacles[{}]", k)));
  }

  if (doc.contains("pursuit")) {
    const auto& ps = doc.at("pursuit");
    if (!ps.is_array()) schema_error("pursuit", "expected an array");
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const std::string where = fmt::format("pursuit[{}]", k);
      check_keys(ps[k], where, {"pursuer", "target", "los_loss_limit", "effort_budget", "capture_radius"});
      PursuitEntry e;
      e.pursuer = require_string(ps[k], "pursuer", where);
      e.target = require_string(ps[k], "target", where);
      for (const auto& id : {e.pursuer, e.target}) {
        if (!ids.count(id)) throw_invalid(where + ": unknown agent '" + id + "'");
      }
      e.los_loss_limit = get_number(ps[k], "los_loss_limit", where, e.los_loss_limit);
      e.effort_budget = get_number(ps[k], "effort_budget", where, e.effort_budget);
      e.capture_radius = get_number(ps[k], "capture_radius", where, e.capture_radius);
      c.pursuits.push_back(e);
    }
  }

  if (doc.contains("transport_comparison")) {
    const auto& ts = doc.at("transport_comparison");
    if (!ts.is_array()) schema_error("transport_comparison", "expected an array");
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const std::string where = fmt::format("transport_comparison[{}]", k);
      check_keys(ts[k], where, {"route", "first", "second"});
      ComparisonEntry e;
      e.first = require_string(ts[k], "first", where);
      e.second = require_string(ts[k], "second", where);
      e.route = get_string(ts[k], "route", where, e.first + " vs " + e.second);
      for (const auto& id : {e.first, e.second}) {
        if (!ids.count(id)) throw_invalid(where + ": unknown agent '" + id + "'");
      }
      c.comparisons.push_back(e);
    }
  }

  if (doc.contains("training")) c.training_seed_set = apply_training(doc.at("training"), c.learning, c.reward);
  local_adapt::validate(c.learning);
  local_adapt::validate(c.reward);

  if (doc.contains("outputs")) {
    check_keys(doc.at("outputs"), "outputs", {"dir"});
    c.output_dir = resolve(base_dir, get_string(doc.at("outputs"), "dir", "outputs", ""));
  }
  return c;
}

void ScenarioConfig::set_seed(std::uint64_t seed) {
  sim.seed = seed;
  if (!training_seed_set) learning.seed = seed;
}

terrain::TerrainRecipe parse_recipe(const std::string& json_text) {
  return parse_recipe(parse_document(json_text, "recipe"));
}

void parse_training(const std::string& json_text, local_adapt::LearningParams& learning,
                    local_adapt::RewardWeights& reward) {
  apply_training(parse_document(json_text, "training"), learning, reward);
  local_adapt::validate(learning);
  local_adapt::validate(reward);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto parent = fs::path(path).parent_path();
  return parse_config(ss.str(), parent.empty() ? "." : parent.string());
}

// ---------------------------------------------------------------------------

ScenarioResult run_scenario(const ScenarioConfig& config) {
  terrain::ElevationGrid grid = config.recipe ? terrain::make_synthetic(*config.recipe).grid
                                              : terrain::load_ascii_grid(config.terrain_path);
  sim::WorldOptions options;
  options.dt = config.sim.dt;
  options.cost_mode = config.sim.cost_mode;
  options.seed = config.sim.seed;

  // One frozen table shared by every agent without its own file.
  std::shared_ptr<const local_adapt::QTable> shared;
  std::map<std::string, std::shared_ptr<const local_adapt::QTable>> loaded;
  auto table_for = [&](const AgentEntry& e) {
    if (!e.qtable_path.empty()) {
      auto& slot = loaded[e.qtable_path];
      if (!slot) slot = std::make_shared<local_adapt::QTable>(local_adapt::load_qtable(e.qtable_path));
      return slot;
    }
    if (!shared) {
      shared = std::make_shared<local_adapt::QTable>(
          local_adapt::train_bypass(config.corridor, config.reward, config.learning).table);
    }
    return shared;
  };

  std::vector<sim::AgentSpec> specs;
  std::map<std::string, std::size_t> index;
  for (const auto& e : config.agents) {
    index[e.id] = specs.size();
    specs.push_back({e.id, config.profile(e.profile), e.start, e.goal, table_for(e)});
  }

  sim::World world(grid, options);
  for (const auto& o : config.obstacles) world.add_obstacle(o);
  for (const auto& s : specs) world.add_agent(s);
  for (const auto& p : config.pursuits) {
    world.add_pursuit({index.at(p.pursuer), index.at(p.target), p.los_loss_limit, p.effort_budget, p.capture_radius});
  }
  world.run(config.sim.max_sim_time);

  ScenarioResult result;
  Report& r = result.report;
  r.seed = config.sim.seed;
  r.dt = config.sim.dt;
  r.clock = world.clock();
  for (std::size_t i = 0; i < world.agents().size(); ++i) {
    r.agents.push_back(sim::summarize(world, i));
    result.traces.push_back({world.agent(i).spec.id, world.agent(i).trace});
    if (world.agent(i).mode == sim::Mode::kNoPath) result.any_no_path = true;
  }
  for (const auto& p : world.pursuits()) {
    r.pursuits.push_back({world.agent(p.rule.pursuer).spec.id, world.agent(p.rule.target).spec.id,
                          sim::pursuit_status_name(p.status), p.end_time, p.splices});
  }

  std::set<std::string> listed;
  auto add_mode = [&](const sim::AgentSpec& spec, const sim::AgentSummary& s) {
    if (!listed.insert(spec.id).second) return;
    const auto& p = spec.profile;
    r.modes.push_back({p.name, p.ref_slope, p.load_kg, p.vessels, s.avg_speed, s.duration, s.distance});
  };
  for (const auto& c : config.comparisons) {
    const auto& a = specs[index.at(c.first)];
    const auto& b = specs[index.at(c.second)];
    const auto run = sim::compare_transport(grid, options, config.obstacles, a, b, config.sim.max_sim_time, c.route);
    r.transport.push_back(run.row);
    add_mode(a, run.first);
    add_mode(b, run.second);
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kReportSchema = "terramob-report";
constexpr int kReportVersion = 1;

json seconds_or_null(double s) { return s < 0.0 ? json(nullptr) : json(s); }
double seconds_from(const json& j) { return j.is_null() ? -1.0 : j.get<double>(); }

}  // namespace

std::string report_to_json(const Report& r) {
  json doc;
  doc["schema"] = kReportSchema;
  doc["version"] = kReportVersion;
  doc["seed"] = r.seed;
  doc["dt"] = r.dt;
  doc["clock_s"] = r.clock;
  doc["agents"] = json::array();
  for (const auto& a : r.agents) {
    doc["agents"].push_back({{"id", a.id},
                             {"profile", a.profile},
                             {"outcome", a.outcome},
                             {"duration_s", seconds_or_null(a.duration)},
                             {"distance_m", a.distance},
                             {"effort", a.effort},
                             {"avg_speed_mps", a.avg_speed},
                             {"plan_time_s", a.plan_time},
                             {"plan_distance_m", a.plan_distance},
                             {"astar_calls", a.astar_calls},
                             {"nodes_expanded", a.nodes_expanded}});
  }
  doc["pursuits"] = json::array();
  for (const auto& p : r.pursuits) {
    doc["pursuits"].push_back({{"pursuer", p.pursuer},
                               {"target", p.target},
                               {"status", p.status},
                               {"end_time_s", p.end_time},
                               {"splices", p.splices}});
  }
  doc["transport_modes"] = json::array();
  for (const auto& m : r.modes) {
    doc["transport_modes"].push_back({{"mode", m.mode},
                                      {"slope_percent", m.slope_percent},
                                      {"load_kg", m.load_kg},
                                      {"vessels", m.vessels},
                                      {"avg_speed_mps", m.avg_speed},
                                      {"duration_s", seconds_or_null(m.duration)},
                                      {"distance_m", m.distance}});
  }
  doc["transport"] = json::array();
  for (const auto& t : r.transport) {
    doc["transport"].push_back({{"route", t.route},
                                {"reference_mode", t.slow_mode},
                                {"alternative_mode", t.fast_mode},
                                {"reference_duration_s", seconds_or_null(t.slow_duration)},
                                {"reference_distance_m", t.slow_distance},
                                {"alternative_duration_s", seconds_or_null(t.fast_duration)},
                                {"alternative_distance_m", t.fast_distance},
                                {"difference_s", t.difference},
                                {"reduction_percent", t.reduction_percent},
                                {"distance_reduction_percent", t.distance_reduction_percent},
                                {"note", t.note}});
  }
  return doc.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("report: not JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema", "") != kReportSchema) {
    throw Error(ErrorCode::kSchema, "report: missing schema \"terramob-report\"");
  }
  if (doc.value("version", 0) != kReportVersion) throw Error(ErrorCode::kSchema, "report: unsupported version");
  Report r;
  try {
    r.seed = doc.value("seed", std::uint64_t{0});
    r.dt = doc.value("dt", 1.0);
    r.clock = doc.value("clock_s", 0.0);
    for (const auto& a : doc.value("agents", json::array())) {
      sim::AgentSummary s;
      s.id = a.at("id").get<std::string>();
      s.profile = a.at("profile").get<std::string>();
      s.outcome = a.at("outcome").get<std::string>();
      s.duration = seconds_from(a.at("duration_s"));
      s.distance = a.at("distance_m").get<double>();
      s.effort = a.value("effort", 0.0);
      s.avg_speed = a.value("avg_speed_mps", 0.0);
      s.plan_time = a.value("plan_time_s", 0.0);
      s.plan_distance = a.value("plan_distance_m", 0.0);
      s.astar_calls = a.value("astar_calls", 0);
      s.nodes_expanded = a.value("nodes_expanded", std::uint64_t{0});
      r.agents.push_back(s);
    }
    for (const auto& p : doc.value("pursuits", json::array())) {
      r.pursuits.push_back({p.at("pursuer").get<std::string>(), p.at("target").get<std::string>(),
                            p.at("status").get<std::string>(), p.at("end_time_s").get<double>(),
                            p.value("splices", std::size_t{0})});
    }
    for (const auto& m : doc.value("transport_modes", json::array())) {
      r.modes.push_back({m.at("mode").get<std::string>(), m.value("slope_percent", 0.0), m.value("load_kg", 0.0),
                         m.value("vessels", 0), m.value("avg_speed_mps", 0.0), seconds_from(m.at("duration_s")),
                         m.value("distance_m", 0.0)});
    }
    for (const auto& t : doc.value("transport", json::array())) {
      sim::TransportRow row;
      row.route = t.at("route").get<std::string>();
      row.slow_mode = t.at("reference_mode").get<std::string>();
      row.fast_mode = t.at("alternative_mode").get<std::string>();
      row.slow_duration = seconds_from(t.at("reference_duration_s"));
      row.slow_distance = t.at("reference_distance_m").get<double>();
      row.fast_duration = seconds_from(t.at("alternative_duration_s"));
      row.fast_distance = t.at("alternative_distance_m").get<double>();
      row.note = t.value("note", "");
      // Derived columns are recomputed so a hand-written report cannot disagree with itself.
      sim::AgentSummary slow, fast;
      slow.profile = row.slow_mode;
      slow.duration = row.slow_duration;
      slow.distance = row.slow_distance;
      slow.outcome = "no route";
      fast.profile = row.fast_mode;
      fast.duration = row.fast_duration;
      fast.distance = row.fast_distance;
      fast.outcome = "no route";
      auto derived = sim::make_transport_row(row.route, slow, fast);
      if (!row.note.empty()) derived.note = row.note;
      r.transport.push_back(derived);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("report: ") + e.what());
  }
  return r;
}

std::string format_hmm(double seconds) {
  if (seconds < 0.0) return "--:--";
  const auto minutes = static_cast<long long>(std::llround(seconds / 60.0));
  return fmt::format("{:02d}:{:02d}", minutes / 60, minutes % 60);
}

namespace {

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t k = 0; k < row.size(); ++k) {
      line += row[k];
      if (k + 1 < row.size()) line += std::string(width[k] - row[k].size() + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

std::string km(double meters) { return fmt::format("{:.1f} km", meters / 1000.0); }

}  // namespace

std::string render_report(const Report& r) {
  std::string out;
  if (!r.agents.empty()) {
    std::vector<std::vector<std::string>> rows{
        {"Agent", "Profile", "Outcome", "Duration", "Distance", "Avg. speed (m/s)", "Effort"}};
    for (const auto& a : r.agents) {
      rows.push_back({a.id, a.profile, a.outcome, a.duration < 0.0 ? "-" : format_hmm(a.duration) + " h",
                      km(a.distance), fmt::format("{:.2f}", a.avg_speed), fmt::format("{:.1f}", a.effort)});
    }
    out += "Agents\n" + render_table(rows) + "\n";
  }
  if (!r.pursuits.empty()) {
    std::vector<std::vector<std::string>> rows{{"Pursuer", "Target", "Status", "Ended (s)"}};
    for (const auto& p : r.pursuits) {
      rows.push_back({p.pursuer, p.target, p.status, p.status == "active" ? "-" : fmt::format("{:.0f}", p.end_time)});
    }
    out += "Pursuits\n" + render_table(rows) + "\n";
  }
  if (!r.modes.empty()) {
    std::vector<std::vector<std::string>> rows{{"Transport mode", "Slope (%)", "Load (kg)", "Vessels", "Avg. speed (m/s)"}};
    for (const auto& m : r.modes) {
      rows.push_back({m.mode, fmt::format("{:g}", m.slope_percent), fmt::format("{:g}", m.load_kg),
                      std::to_string(m.vessels), fmt::format("{:.2f}", m.avg_speed)});
    }
    out += "Transport modes\n" + render_table(rows) + "\n";
  }
  if (r.transport.empty()) {
    out += "Transport comparison: no routes\n";
    return out;
  }
  const bool same_modes = std::all_of(r.transport.begin(), r.transport.end(), [&](const sim::TransportRow& t) {
    return t.slow_mode == r.transport.front().slow_mode && t.fast_mode == r.transport.front().fast_mode;
  });
  const std::string ref = same_modes ? r.transport.front().slow_mode : "Reference";
  const std::string alt = same_modes ? r.transport.front().fast_mode : "Alternative";
  std::vector<std::vector<std::string>> rows{
      {"Route", ref + " duration", alt + " duration", "Difference", "Reduction (%)"}};
  for (const auto& t : r.transport) {
    auto cell = [](double d, double m) { return d < 0.0 ? std::string("no route") : format_hmm(d) + " h (" + km(m) + ")"; };
    if (!t.note.empty()) {
      rows.push_back({t.route, cell(t.slow_duration, t.slow_distance), cell(t.fast_duration, t.fast_distance), "-",
                      t.note});
      continue;
    }
    const double diff_m = t.slow_distance - t.fast_distance;
    const std::string diff = (t.difference < 0.0 ? "-" : "") + format_hmm(std::abs(t.difference)) + " h (" +
                             km(std::abs(diff_m)) + ")";
    rows.push_back({t.route, cell(t.slow_duration, t.slow_distance), cell(t.fast_duration, t.fast_distance), diff,
                    fmt::format("{:.1f} ({})", t.reduction_percent, static_cast<long long>(t.distance_reduction_percent))});
  }
  out += "Transport comparison\n" + render_table(rows);
  return out;
}

void write_outputs(const ScenarioResult& result, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "traces", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + p.string());
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + p.string());
  };
  write(fs::path(dir) / "report.json", report_to_json(result.report));
  write(fs::path(dir) / "report.txt", render_report(result.report));
  for (const auto& t : result.traces) {
    std::ostringstream ss;
    sim::write_trace_csv(ss, t.records);
    write(fs::path(dir) / "traces" / (t.agent_id + ".csv"), ss.str());
  }
}

}  // namespace terramob::scenario
