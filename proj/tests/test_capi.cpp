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

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "terramob/terramob.h"

namespace fs = std::filesystem;

namespace {

const std::string kFixtures = TERRAMOB_FIXTURES;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("terramob_capi_" + name);
  fs::remove_all(p);
  return p;
}

struct Grid {
  tm_grid* g = nullptr;
  ~Grid() { tm_grid_free(g); }
};
struct Plan {
  tm_plan* p = nullptr;
  ~Plan() { tm_plan_free(p); }
};

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(tm_version()).size() > 0);
  CHECK(std::string(tm_status_name(TM_OK)) == "ok");
  CHECK(std::string(tm_status_name(TM_NO_PATH)) == "no path");
  CHECK(std::string(tm_status_name(static_cast<tm_status>(42))) == "unknown");
}

TEST_CASE("null arguments are rejected with a message") {
  tm_grid* g = nullptr;
  CHECK(tm_grid_load(nullptr, &g) == TM_INVALID_ARGUMENT);
  CHECK(std::string(tm_last_error()).size() > 0);
  CHECK(tm_grid_dims(nullptr, nullptr, nullptr, nullptr) == TM_INVALID_ARGUMENT);
  tm_grid_free(nullptr);
  tm_plan_free(nullptr);
  tm_string_free(nullptr);
}

TEST_CASE("load errors map to status codes") {
  tm_grid* g = nullptr;
  CHECK(tm_grid_load((kFixtures + "/missing.asc").c_str(), &g) == TM_IO);
  CHECK(g == nullptr);
  CHECK(tm_grid_load((kFixtures + "/malformed.asc").c_str(), &g) == TM_PARSE);
  CHECK(std::string(tm_last_error()).find("line 8") != std::string::npos);
  CHECK(tm_grid_synthetic("{\"kind\": \"volcano\"}", &g) == TM_SCHEMA);
  CHECK(tm_grid_synthetic("{", &g) == TM_PARSE);
  CHECK(tm_grid_synthetic("{\"kind\": \"flat\", \"nrows\": 0}", &g) == TM_INVALID_ARGUMENT);
}

TEST_CASE("grid access and markers") {
  Grid g;
  REQUIRE(tm_grid_synthetic("{\"kind\": \"two_corridor\"}", &g.g) == TM_OK);
  int nrows = 0, ncols = 0, r = -1, c = -1;
  double cs = 0;
  REQUIRE(tm_grid_dims(g.g, &nrows, &ncols, &cs) == TM_OK);
  CHECK(cs == 30.0);
  CHECK(tm_grid_marker(g.g, "start", &r, &c) == TM_OK);
  CHECK((r == 2 && c == 2));
  CHECK(tm_grid_marker(g.g, "middle", &r, &c) == TM_INVALID_ARGUMENT);
  double h = 0;
  int nodata = 0;
  CHECK(tm_grid_elevation(g.g, nrows, 0, &h, &nodata) == TM_INVALID_ARGUMENT);
  CHECK(tm_grid_elevation(g.g, nrows - 1, ncols - 1, &h, &nodata) == TM_OK);
  CHECK(nodata == 1);

  Grid flat;
  REQUIRE(tm_grid_synthetic("{\"kind\": \"flat\", \"nrows\": 4, \"ncols\": 4}", &flat.g) == TM_OK);
  CHECK(tm_grid_marker(flat.g, "start", &r, &c) == TM_INVALID_ARGUMENT);
}

TEST_CASE("save and reload round trip") {
  Grid g, back;
  REQUIRE(tm_grid_synthetic("{\"kind\": \"cone\", \"nrows\": 9, \"ncols\": 9, \"peak\": 37.5}", &g.g) == TM_OK);
  const auto path = scratch("cone.asc");
  REQUIRE(tm_grid_save(g.g, path.c_str()) == TM_OK);
  REQUIRE(tm_grid_load(path.c_str(), &back.g) == TM_OK);
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 9; ++c) {
      double a = 0, b = 1;
      int na = 0, nb = 0;
      tm_grid_elevation(g.g, r, c, &a, &na);
      tm_grid_elevation(back.g, r, c, &b, &nb);
      CHECK(a == b);
    }
  }
  fs::remove(path);
}

TEST_CASE("profiles") {
  CHECK(tm_profile_count() == 6);
  CHECK(tm_profile_name(99) == nullptr);
  double s = 0;
  int ok = 0;
  REQUIRE(tm_profile_speed("Mule", 25.0, &s, &ok) == TM_OK);
  CHECK(s == doctest::Approx(0.95625));
  CHECK(ok == 1);
  REQUIRE(tm_profile_speed("Ox-driven cart", 20.0, &s, &ok) == TM_OK);
  CHECK(ok == 0);
  CHECK(tm_profile_speed("Unicorn", 0.0, &s, &ok) == TM_INVALID_ARGUMENT);
}

TEST_CASE("plan on flat ground matches the octile closed form") {
  Grid g;
  REQUIRE(tm_grid_synthetic("{\"kind\": \"flat\", \"nrows\": 10, \"ncols\": 10}", &g.g) == TM_OK);
  Plan p;
  std::uint64_t nodes = 0;
  REQUIRE(tm_plan_compute(g.g, "Fit adults", 0, 0, 3, 9, &p.p, &nodes) == TM_OK);
  double t = 0, d = 0;
  std::size_t cells = 0;
  REQUIRE(tm_plan_stats(p.p, &t, &d, &cells) == TM_OK);
  const double expect_d = (3 * std::sqrt(2.0) + 6) * 30.0;
  CHECK(std::abs(d - expect_d) < 1e-9);
  CHECK(std::abs(t - expect_d / 1.5) < 1e-5);
  CHECK(cells == 10);
  CHECK(nodes > 0);
  int r = -1, c = -1;
  CHECK(tm_plan_cell(p.p, 9, &r, &c) == TM_OK);
  CHECK((r == 3 && c == 9));
  CHECK(tm_plan_cell(p.p, 10, &r, &c) == TM_INVALID_ARGUMENT);
  const auto csv = scratch("plan.csv");
  REQUIRE(tm_plan_write_csv(p.p, csv.c_str()) == TM_OK);
  CHECK(slurp(csv).rfind("index,row,col,", 0) == 0);
  fs::remove(csv);
}

TEST_CASE("unreachable goal gives TM_NO_PATH") {
  Grid g;
  REQUIRE(tm_grid_load((kFixtures + "/moat.asc").c_str(), &g.g) == TM_OK);
  Plan p;
  std::uint64_t nodes = 0;
  CHECK(tm_plan_compute(g.g, "Mule", 0, 0, 2, 2, &p.p, &nodes) == TM_NO_PATH);
  CHECK(p.p == nullptr);
  CHECK(nodes > 0);
  CHECK(std::string(tm_last_error()).size() > 0);
  CHECK(tm_plan_compute(g.g, "Mule", 0, 0, 1, 1, &p.p, &nodes) == TM_INVALID_ARGUMENT);
}

TEST_CASE("line of sight and viewshed") {
  Grid g;
  REQUIRE(tm_grid_synthetic("{\"kind\": \"ridge\", \"nrows\": 5, \"ncols\": 30, \"position\": 15, \"height\": 50}",
                            &g.g) == TM_OK);
  int vis = -1;
  REQUIRE(tm_line_of_sight(g.g, 2, 0, 2, 29, 1.7, 0.0, &vis) == TM_OK);
  CHECK(vis == 0);
  REQUIRE(tm_line_of_sight(g.g, 2, 0, 2, 5, 1.7, 0.0, &vis) == TM_OK);
  CHECK(vis == 1);
  const auto pgm = scratch("vs.pgm"), csv = scratch("vs.csv");
  std::size_t n_pgm = 0, n_csv = 0;
  REQUIRE(tm_viewshed_write(g.g, 2, 0, 1e9, 1.7, TM_MASK_PGM, pgm.c_str(), &n_pgm) == TM_OK);
  REQUIRE(tm_viewshed_write(g.g, 2, 0, 1e9, 1.7, TM_MASK_CSV, csv.c_str(), &n_csv) == TM_OK);
  CHECK(n_pgm == n_csv);
  CHECK(n_pgm > 0);
  CHECK(n_pgm < 150);
  CHECK(slurp(pgm).rfind("P2", 0) == 0);
  CHECK(tm_viewshed_write(g.g, 2, 0, 1e9, 1.7, TM_MASK_CSV, "/nonexistent/dir/x.csv", &n_csv) == TM_IO);
  fs::remove(pgm);
  fs::remove(csv);
}

TEST_CASE("training writes a loadable table") {
  const auto dir = scratch("train");
  fs::create_directories(dir);
  tm_train_summary s{};
  REQUIRE(tm_train("{\"episodes\": 50}", 1, 3, (dir / "q.txt").c_str(), (dir / "curve.csv").c_str(), &s) == TM_OK);
  CHECK(s.episodes == 50);
  CHECK(s.heldout_success_rate >= 0.0);
  CHECK(s.heldout_success_rate <= 1.0);
  CHECK(fs::file_size(dir / "q.txt") > 0);
  CHECK(slurp(dir / "curve.csv").rfind("episode,", 0) == 0);
  // Same seed, same bytes.
  REQUIRE(tm_train("{\"episodes\": 50}", 1, 3, (dir / "q2.txt").c_str(), nullptr, nullptr) == TM_OK);
  CHECK(slurp(dir / "q.txt") == slurp(dir / "q2.txt"));
  CHECK(tm_train("{\"gamma\": 2}", 0, 0, (dir / "q3.txt").c_str(), nullptr, nullptr) == TM_INVALID_ARGUMENT);
  CHECK(tm_train("{\"bogus\": 2}", 0, 0, (dir / "q3.txt").c_str(), nullptr, nullptr) == TM_SCHEMA);
  fs::remove_all(dir);
}

TEST_CASE("simulate writes outputs and honours strict") {
  const auto dir = scratch("sim");
  tm_sim_overrides o{};
  const std::string out = dir.string();
  o.out_dir = out.c_str();
  o.strict = -1;
  char* text = nullptr;
  REQUIRE(tm_simulate((kFixtures + "/pursuit_flat.json").c_str(), &o, &text) == TM_OK);
  REQUIRE(text != nullptr);
  CHECK(std::string(text).find("interception") != std::string::npos);
  tm_string_free(text);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "traces" / "hostile.csv"));

  char* rendered = nullptr;
  REQUIRE(tm_report_render((dir / "report.json").c_str(), &rendered) == TM_OK);
  CHECK(std::string(rendered) == slurp(dir / "report.txt"));
  tm_string_free(rendered);

  CHECK(tm_simulate((kFixtures + "/strict_no_path.json").c_str(), &o, nullptr) == TM_NO_PATH);
  CHECK(fs::exists(dir / "traces" / "walker.csv"));
  o.strict = 0;
  CHECK(tm_simulate((kFixtures + "/strict_no_path.json").c_str(), &o, nullptr) == TM_OK);

  CHECK(tm_simulate((kFixtures + "/nope.json").c_str(), &o, nullptr) == TM_IO);
  CHECK(tm_report_render((kFixtures + "/not_a_report.json").c_str(), &rendered) == TM_SCHEMA);
  fs::remove_all(dir);
}

TEST_CASE("the last error is per thread and cleared by success") {
  tm_grid* g = nullptr;
  CHECK(tm_grid_load(nullptr, &g) == TM_INVALID_ARGUMENT);
  CHECK(std::string(tm_last_error()) != "");
  CHECK(tm_grid_synthetic("{\"kind\": \"flat\"}", &g) == TM_OK);
  CHECK(std::string(tm_last_error()) == "");
  tm_grid_free(g);
}
