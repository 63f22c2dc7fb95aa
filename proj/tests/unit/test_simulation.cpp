#include "eccbf/example1.hpp"
#include "eccbf/scenario.hpp"
#include "eccbf/simulation.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eccbf;
using namespace eccbf::sim;

namespace {

const std::filesystem::path kScenarios = ECCBF_SCENARIO_DIR;

const char* kWall = R"(
name = "wall"
dt = 0.01
horizon = 2.0
initial_state = [-8.0, 0.0]

[domain]
lower = [-10.0, -3.0]
upper = [1.0, 3.0]

[system]
kind = "single_integrator"

[extent]
kind = "ball"
radius = 1.0

[safe_set]
kind = "halfspace"
normal = [-1.0, 0.0]

[filter]
kind = "sampled"
samples = 4
tau_margin = 1.0
constants = "user"
A = 1.0
B = 2.0

[nominal]
kind = "constant"
input = [1.0, 0.0]

[output]
record_timing = false
)";

std::vector<std::filesystem::path> shipped() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(kScenarios))
    if (e.path().extension() == ".toml") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("shipped scenarios validate") {
  const auto files = shipped();
  CHECK(files.size() == 6);
  for (const auto& f : files) {
    CAPTURE(f.string());
    CHECK_NOTHROW(load_config(f.string()));
  }
}

TEST_CASE("config round trip") {
  for (const auto& f : shipped()) {
    const auto c = load_config(f.string());
    CHECK(parse_config(serialize_config(c)) == c);
  }
  ScenarioConfig c = parse_config(kWall);
  c.seed = 123456789012345ull;
  c.initial_state_noise = 0.01;
  c.dt = 1.0 / 3.0;
  c.filter.spacing = BoundarySpacing::ArcLength;
  c.filter.qp_tolerance = 1e-11;
  c.output.svg = false;
  c.output.extent_stride = 7;
  CHECK(parse_config(serialize_config(c)) == c);
}

TEST_CASE("unknown keys and bad values are all reported") {
  std::string text = kWall;
  text += "\n[extra]\nfoo = 1\n";
  text.replace(text.find("dt = 0.01"), 9, "dt = -0.01");
  text.replace(text.find("radius = 1.0"), 12, "radius = \"big\"");
  try {
    parse_config(text);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("extra") != std::string::npos);
    CHECK(what.find("radius") != std::string::npos);
  }
  std::string dt_only = kWall;
  dt_only.replace(dt_only.find("dt = 0.01"), 9, "dt = -0.01");
  CHECK_THROWS_WITH_AS(parse_config(dt_only), doctest::Contains("dt"), ConfigError);
}

TEST_CASE("initial extent must start inside the safe set") {
  ScenarioConfig c = parse_config(kWall);
  c.initial_state = {-0.5, 0.0};
  const auto errors = validate_config(c);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].find("initial") != std::string::npos);
  CHECK_THROWS_AS(run_scenario(c), ConfigError);
}

TEST_CASE("identical configs give identical CSV") {
  ScenarioConfig c = load_config((kScenarios / "cs2_sampled200.toml").string());
  c.horizon = 1.0;
  c.output.record_timing = false;
  c.initial_state_noise = 0.01;
  const auto a = run_scenario(c), b = run_scenario(c);
  CHECK(trajectory_csv(a.trajectory, 3, 2) == trajectory_csv(b.trajectory, 3, 2));
  c.seed += 1;
  const auto other = run_scenario(c);
  CHECK(trajectory_csv(other.trajectory, 3, 2) != trajectory_csv(a.trajectory, 3, 2));
}

TEST_CASE("CSV layout") {
  const std::string empty = trajectory_csv(Trajectory{}, 2, 2);
  CHECK(empty == "t,x1,x2,u1,u2,min_boundary_h,filter_active,solve_ms,status\n");

  ScenarioConfig c = parse_config(kWall);
  c.horizon = 2 * c.dt;
  const auto r = run_scenario(c);
  const std::string csv = trajectory_csv(r.trajectory, 2, 2);
  CHECK(count_lines(csv) == 4);
  const auto parsed = parse_trajectory_csv(csv);
  REQUIRE(parsed.times.size() == 3);
  CHECK(parsed.times[0] < parsed.times[1]);
  CHECK(parsed.times[1] < parsed.times[2]);
  for (std::size_t i = 0; i < 3; ++i) CHECK(parsed.states[i] == r.trajectory.states[i]);
  CHECK_THROWS_AS(parse_trajectory_csv("t,x1\n0,1,2\n"), ConfigError);
}

TEST_CASE("summary is consistent with its trajectory") {
  ScenarioConfig c = parse_config(kWall);
  c.horizon = 8.0;
  const auto r = run_scenario(c);
  const auto& t = r.trajectory;
  double min_h = INFINITY;
  std::size_t active = 0;
  for (const auto& d : t.diagnostics) {
    min_h = std::min(min_h, d.min_boundary_h);
    active += d.filter_active ? 1 : 0;
    CHECK(d.status == StepStatus::Ok);
  }
  for (const auto& u : t.inputs) CHECK(u.norm() <= 1.0 + 1e-9);
  CHECK(r.summary.steps == t.size());
  CHECK(r.summary.steps == 801);
  CHECK(r.summary.min_boundary_h == min_h);
  CHECK(r.summary.filter_active_steps == active);
  CHECK(active > 0);
  CHECK(r.summary.infeasible_halts == 0);
  CHECK(r.summary.terminal_state == t.states.back());
  CHECK(min_h >= -1e-6);

  const auto j = summary_json(r.summary);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> expected = {
      "scenario",  "filter",       "steps",    "dt",       "horizon",           "min_boundary_h",
      "min_center_h", "filter_active_steps", "infeasible_halts", "halt_status", "halt_time", "solve_ms",
      "max_solver_iterations", "terminal_time", "terminal_state", "constants"};
  CHECK(keys == expected);
  CHECK(j["constants"]["provenance"] == "user");
  CHECK(j["halt_status"].is_null());
}

TEST_CASE("infeasible states halt with the status kept") {
  ScenarioConfig c = parse_config(kWall);
  c.filter.B = 200.0;  // the tightening now exceeds what the input can deliver
  c.initial_state = {-4.0, 0.0};
  const auto r = run_scenario(c);
  REQUIRE(r.summary.halt_status.has_value());
  CHECK(*r.summary.halt_status == StepStatus::Infeasible);
  CHECK(r.summary.infeasible_halts == 1);
  CHECK(r.trajectory.size() == 1);
}

TEST_CASE("superellipse outlines stay inside the disk under the SOS filter") {
  ScenarioConfig c = load_config((kScenarios / "cs1_sos.toml").string());
  c.horizon = 3.0;
  const auto r = run_scenario(c);
  REQUIRE_FALSE(r.summary.halt_status.has_value());
  const auto E = make_extent(c);
  const auto h = make_safe(c);
  double worst = INFINITY;
  for (std::size_t i = 0; i < r.trajectory.size(); i += 10)
    for (const auto& p : extent_outline(E, r.trajectory.states[i], 256)) worst = std::min(worst, h.value(p));
  CHECK(worst >= -1e-6);
}

TEST_CASE("zero contour of the unit disk") {
  const auto h = SafeFunction::ball(Point2::Zero(), 1.0);
  const auto segments = zero_contour(h, Point2(-1.5, -1.5), Point2(1.5, 1.5), 100);
  CHECK(segments.size() > 100);
  for (const auto& [a, b] : segments) {
    CHECK(std::abs(a.norm() - 1.0) < 1e-3);
    CHECK(std::abs(b.norm() - 1.0) < 1e-3);
  }
}

TEST_CASE("SVG and output files") {
  ScenarioConfig c = parse_config(kWall);
  c.horizon = 1.0;
  c.output.extent_stride = 25;
  const auto r = run_scenario(c);
  PlotInput in{r.trajectory.states, c, 25};
  const std::string svg = render_svg(in);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("id=\"safe-set\"") != std::string::npos);
  CHECK(svg.find("id=\"extents\"") != std::string::npos);
  CHECK(svg.find("id=\"path\"") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "eccbf_test_outputs";
  std::filesystem::remove_all(dir);
  const auto files = emit_outputs(c, r, dir);
  CHECK(files.size() == 3);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));
  std::ifstream json(dir / "wall.json");
  std::stringstream text;
  text << json.rdbuf();
  CHECK(nlohmann::json::parse(text.str())["steps"] == r.summary.steps);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(write_file("/proc/definitely/not/here.csv", "x"), IoError);
}

TEST_CASE("half-plane feasibility table") {
  const auto report = run_example1_table();
  CHECK(report.ok());
  CHECK(report.rows.size() == 6);
  CHECK(report.table().find("monotone") != std::string::npos);
}
