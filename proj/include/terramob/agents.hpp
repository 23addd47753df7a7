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

#include <optional>
#include <string>
#include <vector>

#include "terramob/terrain.hpp"

namespace terramob::agents {

enum class AgentKind { kHuman, kAnimal };
enum class Role { kCivilian, kHostile, kTransport };

// How a downhill step enters the speed law.
enum class DownhillMode {
  kSymmetric,  // |rise| / run, uphill and downhill cost the same
  kFlat,       // downhill treated as level ground
};

// Mobility parameters for one agent type. Human profiles carry a single
// percentage reduction at ref_slope; animal profiles carry a slope factor at
// ref_slope plus a constant load factor.
struct AgentProfile {
  std::string name;
  AgentKind kind = AgentKind::kHuman;
  double s_flat = 1.0;             // m/s on level ground
  double reduction_at_ref = 0.0;   // percent, human kind
  double ref_slope = 15.0;         // percent
  double r_load = 1.0;             // animal kind
  double r_slope_at_ref = 1.0;     // animal kind
  double load_kg = 0.0;
  int vessels = 0;
  double max_slope = 35.0;         // percent; steeper edges are impassable
  double body_radius = 0.3;        // meters
  Role role = Role::kCivilian;
  DownhillMode downhill = DownhillMode::kSymmetric;

  // Slope factor at ref_slope, whichever kind.
  double r_ref() const;
};

// Throws Error(kInvalidArgument) when the profile breaks its invariants.
void validate(const AgentProfile& p);

struct SpeedResult {
  double speed = 0.0;
  double r_effective = 0.0;
  bool passable = false;
};

// 1 - percent/100. Throws for percent outside [0, 100].
double reduction_factor(double reduction_percent);

// Slope factor: 1 at level ground, linear through (ref_slope, r_ref),
// extrapolated past ref_slope and clamped below at kMinSlopeFactor.
inline constexpr double kMinSlopeFactor = 0.10;
double slope_factor(double slope, double ref_slope, double r_ref);

SpeedResult human_speed(const AgentProfile& p, double slope);
SpeedResult animal_speed(const AgentProfile& p, double slope);
// Dispatches on p.kind.
SpeedResult speed_at(const AgentProfile& p, double slope);

// Fit adults, Elderly, Families, Hostile, Ox-driven cart, Mule.
const std::vector<AgentProfile>& builtin_profiles();
// Throws Error(kInvalidArgument) for unknown names.
const AgentProfile& builtin_profile(const std::string& name);

// Slope entering the speed law for the step a -> b (honours p.downhill).
double effective_slope(const AgentProfile& p, const terrain::SlopeSample& s);

// Seconds to cross from a to b, or nullopt when the edge is impassable for p
// (nodata endpoint or slope above max_slope). Throws for non-adjacent cells.
std::optional<double> traversal_time(const AgentProfile& p, const terrain::ElevationGrid& grid,
                                     terrain::CellIndex a, terrain::CellIndex b);

const char* kind_name(AgentKind k);
const char* role_name(Role r);

}  // namespace terramob::agents
