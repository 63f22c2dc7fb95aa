#ifndef ECCBF_SCENARIO_HPP
#define ECCBF_SCENARIO_HPP

#include "eccbf/common.hpp"
#include "eccbf/dynamics.hpp"
#include "eccbf/geometry.hpp"
#include "eccbf/safety_filters.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace eccbf::sim {

struct SystemSpec {
  enum class Kind { SingleIntegrator, Unicycle };
  Kind kind = Kind::Unicycle;
  std::size_t dimension = 2;  // single integrator only
  double input_bound = 1.0;

  bool operator==(const SystemSpec&) const = default;
};

struct ExtentSpec {
  enum class Kind { Ball, Ellipse, Superellipse4 };
  Kind kind = Kind::Ball;
  double radius = 1.0;                                       // ball
  Eigen::Matrix2d shape = Eigen::Matrix2d::Identity();       // ellipse
  double a = 1.0, b = 1.0, size = 1.0;                       // superellipse4
  bool oriented = true;  // rotate with the heading when the system has one

  bool operator==(const ExtentSpec&) const = default;
};

struct SafeSpec {
  enum class Kind { Halfspace, Ball, Superellipse };
  Kind kind = Kind::Ball;
  Point2 normal = Point2(-1.0, 0.0);  // halfspace: h = normal . y + offset
  double offset = 0.0;
  Point2 center = Point2::Zero();     // ball, superellipse
  double radius = 1.0;                // ball
  Point2 semi_axes = Point2::Ones();  // superellipse
  int exponent = 4;                   // superellipse

  bool operator==(const SafeSpec&) const = default;
};

struct FilterSpec {
  enum class Kind { None, Zcbf, Sampled, Sos };
  enum class Constants { User, Estimated };
  Kind kind = Kind::None;
  // zcbf
  double alpha_gain = 1.0;
  // sampled
  std::size_t samples = 200;
  double gamma = 1.0;
  double tau_margin = 1.05;
  BoundarySpacing spacing = BoundarySpacing::UniformAngle;
  Constants constants = Constants::Estimated;
  double A = 0.0, B = 0.0;  // user constants
  int estimation_resolution = 20;
  double estimation_margin = 1.1;
  double qp_tolerance = 1e-9;
  int qp_max_iterations = 50000;
  // sos
  double alpha1_gain = 1.0;
  double alpha2_gain = 1.0;
  std::optional<int> multiplier_degree;
  double sdp_tolerance = 1e-8;
  int sdp_max_iterations = 200;

  bool operator==(const FilterSpec&) const = default;
};

struct NominalSpec {
  enum class Kind { GoToGoal, WaypointCycle, Constant };
  Kind kind = Kind::GoToGoal;
  std::vector<Point2> goals = {Point2::Zero()};  // go_to_goal uses the first
  double position_gain = 1.0;
  double heading_gain = 1.0;
  double switch_radius = 0.1;
  std::vector<double> input;  // constant

  bool operator==(const NominalSpec&) const = default;
};

struct OutputSpec {
  bool csv = true;
  bool svg = true;
  bool summary = true;
  std::size_t extent_stride = 100;  // steps between extent outlines in the SVG
  bool record_timing = true;        // false writes solve_ms = 0 for reproducible files

  bool operator==(const OutputSpec&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  double dt = 0.01;
  double horizon = 10.0;
  std::vector<double> initial_state;
  double initial_state_noise = 0.0;  // std dev of Gaussian noise on the initial state, drawn from seed
  std::size_t probe_points = 2000;   // dense extent-boundary probe for min h
  Point2 domain_lower = Point2(-1.0, -1.0);
  Point2 domain_upper = Point2(1.0, 1.0);
  SystemSpec system;
  ExtentSpec extent;
  SafeSpec safe;
  FilterSpec filter;
  NominalSpec nominal;
  OutputSpec output;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses a TOML scenario. Throws ConfigError listing every problem found.
ScenarioConfig parse_config(std::string_view toml_text, const std::string& source = "<string>");
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& config);

/// Every violated invariant, including the initial extent lying strictly
/// inside the safe set on a dense boundary probe. Empty when valid.
std::vector<std::string> validate_config(const ScenarioConfig& config);

ControlAffineSystem make_system(const ScenarioConfig& config);
ExtentFunction make_extent(const ScenarioConfig& config);
SafeFunction make_safe(const ScenarioConfig& config);
NominalController make_nominal(const ScenarioConfig& config);
/// Initial state with the seeded noise applied.
Vector make_initial_state(const ScenarioConfig& config);

struct BuiltFilter {
  std::unique_ptr<SafetyFilter> filter;
  std::optional<LipschitzConstants> constants;  // sampled filter only
};
BuiltFilter make_filter(const ScenarioConfig& config);

std::string to_string(FilterSpec::Kind kind);

}  // namespace eccbf::sim

#endif  // ECCBF_SCENARIO_HPP
