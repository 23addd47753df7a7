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

#include "terramob/agents.hpp"

#include <algorithm>
#include <cmath>

namespace terramob::agents {

using terrain::CellIndex;
using terrain::ElevationGrid;

double AgentProfile::r_ref() const {
  return kind == AgentKind::kHuman ? reduction_factor(reduction_at_ref) : r_slope_at_ref;
}

void validate(const AgentProfile& p) {
  auto fail = [&](const std::string& what) { throw_invalid("profile '" + p.name + "': " + what); };
  if (p.name.empty()) throw_invalid("profile name must not be empty");
  if (!(p.s_flat > 0.0) || !std::isfinite(p.s_flat)) fail("s_flat must be positive");
  if (!(p.ref_slope > 0.0) || !std::isfinite(p.ref_slope)) fail("ref_slope must be positive");
  if (!(p.max_slope > 0.0)) fail("max_slope must be positive");
  if (!(p.body_radius >= 0.0)) fail("body_radius must be non-negative");
  if (p.load_kg < 0.0 || p.vessels < 0) fail("load and vessels must be non-negative");
  if (p.kind == AgentKind::kHuman) {
    if (!(p.reduction_at_ref >= 0.0 && p.reduction_at_ref < 100.0)) fail("reduction_at_ref must be in [0, 100)");
    if (p.r_load != 1.0 || p.load_kg != 0.0) fail("human profiles carry no load terms");
  } else {
    if (!(p.r_load > 0.0 && p.r_load <= 1.0)) fail("r_load must be in (0, 1]");
    if (!(p.r_slope_at_ref > 0.0 && p.r_slope_at_ref <= 1.0)) fail("r_slope_at_ref must be in (0, 1]");
  }
}

double reduction_factor(double reduction_percent) {
  if (!(reduction_percent >= 0.0 && reduction_percent <= 100.0)) {
    throw_invalid("reduction percent must be in [0, 100]");
  }
  return 1.0 - reduction_percent / 100.0;
}

double slope_factor(double slope, double ref_slope, double r_ref) {
  if (slope == ref_slope) return r_ref;
  const double r = 1.0 - (1.0 - r_ref) * (slope / ref_slope);
  return std::max(r, kMinSlopeFactor);
}

namespace {

SpeedResult apply_law(const AgentProfile& p, double slope, double r_slope, double r_other) {
  if (!(slope >= 0.0)) throw_invalid("slope must be non-negative");
  if (slope > p.max_slope) return {0.0, 0.0, false};
  const double r = r_slope * r_other;
  return {p.s_flat * r, r, true};
}

}  // namespace

SpeedResult human_speed(const AgentProfile& p, double slope) {
  if (p.kind != AgentKind::kHuman) throw_invalid("human_speed: '" + p.name + "' is not a human profile");
  return apply_law(p, slope, slope_factor(slope, p.ref_slope, p.r_ref()), 1.0);
}

SpeedResult animal_speed(const AgentProfile& p, double slope) {
  if (p.kind != AgentKind::kAnimal) throw_invalid("animal_speed: '" + p.name + "' is not an animal profile");
  return apply_law(p, slope, slope_factor(slope, p.ref_slope, p.r_slope_at_ref), p.r_load);
}

SpeedResult speed_at(const AgentProfile& p, double slope) {
  return p.kind == AgentKind::kHuman ? human_speed(p, slope) : animal_speed(p, slope);
}

const std::vector<AgentProfile>& builtin_profiles() {
  static const std::vector<AgentProfile> kProfiles = [] {
    std::vector<AgentProfile> v;
    auto human = [&](const char* name, double s_flat, double reduction, double radius, Role role) {
      AgentProfile p;
      p.name = name;
      p.kind = AgentKind::kHuman;
      p.s_flat = s_flat;
      p.reduction_at_ref = reduction;
      p.ref_slope = 15.0;
      p.max_slope = 35.0;
      p.body_radius = radius;
      p.role = role;
      v.push_back(p);
    };
    human("Fit adults", 1.5, 25.0, 0.3, Role::kCivilian);
    human("Elderly", 1.0, 50.0, 0.3, Role::kCivilian);
    human("Families", 1.2, 35.0, 0.6, Role::kCivilian);
    human("Hostile", 1.8, 20.0, 0.3, Role::kHostile);

    auto animal = [&](const char* name, double s_flat, double load_reduction, double ref_slope,
                      double r_slope, double load, int vessels, double max_slope, double radius) {
      AgentProfile p;
      p.name = name;
      p.kind = AgentKind::kAnimal;
      p.s_flat = s_flat;
      p.ref_slope = ref_slope;
      p.r_load = reduction_factor(load_reduction);
      p.r_slope_at_ref = r_slope;
      p.load_kg = load;
      p.vessels = vessels;
      p.max_slope = max_slope;
      p.body_radius = radius;
      p.role = Role::kTransport;
      v.push_back(p);
    };
    animal("Ox-driven cart", 1.25, 25.0, 10.0, 0.90, 4 * 100.0, 4, 15.0, 1.5);
    animal("Mule", 1.7, 25.0, 25.0, 0.75, 2 * 50.0, 2, 30.0, 0.6);
    return v;
  }();
  return kProfiles;
}

const AgentProfile& builtin_profile(const std::string& name) {
  for (const auto& p : builtin_profiles()) {
    if (p.name == name) return p;
  }
  throw_invalid("unknown profile '" + name + "'");
}

double effective_slope(const AgentProfile& p, const terrain::SlopeSample& s) {
  if (p.downhill == DownhillMode::kFlat && s.rise < 0.0) return 0.0;
  return s.percent;
}

std::optional<double> traversal_time(const AgentProfile& p, const ElevationGrid& grid, CellIndex a,
                                     CellIndex b) {
  if (!grid.in_bounds(a) || !grid.in_bounds(b) || terrain::chebyshev(a, b) != 1) {
    throw_invalid("traversal_time: cells are not adjacent");
  }
  if (grid.is_nodata(a) || grid.is_nodata(b)) return std::nullopt;
  const auto s = terrain::slope_percent(grid, a, b);
  const auto v = speed_at(p, effective_slope(p, s));
  if (!v.passable) return std::nullopt;
  return s.run / v.speed;
}

const char* kind_name(AgentKind k) { return k == AgentKind::kHuman ? "human" : "animal"; }

const char* role_name(Role r) {
  switch (r) {
    case Role::kCivilian: return "civilian";
    case Role::kHostile: return "hostile";
    case Role::kTransport: return "transport";
  }
  return "civilian";
}

}  // namespace terramob::agents
