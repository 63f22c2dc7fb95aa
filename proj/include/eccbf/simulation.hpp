#ifndef ECCBF_SIMULATION_HPP
#define ECCBF_SIMULATION_HPP

#include "eccbf/dynamics.hpp"
#include "eccbf/scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eccbf::sim {

struct SolveTimeStats {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct RunSummary {
  std::string scenario;
  std::string filter;
  std::size_t steps = 0;  // trajectory rows
  double dt = 0.0;
  double horizon = 0.0;
  double min_boundary_h = 0.0;  // min over time of the min over the extent boundary probe
  double min_center_h = 0.0;    // min over time of h at the extent center
  std::size_t filter_active_steps = 0;
  std::size_t infeasible_halts = 0;
  std::optional<StepStatus> halt_status;
  std::optional<double> halt_time;
  SolveTimeStats solve_ms;
  int max_solver_iterations = 0;
  double terminal_time = 0.0;
  Vector terminal_state;
  std::optional<LipschitzConstants> constants;
};

/// Keys, in order: scenario, filter, steps, dt, horizon, min_boundary_h,
/// min_center_h, filter_active_steps, infeasible_halts, halt_status,
/// halt_time, solve_ms {min, median, max}, max_solver_iterations,
/// terminal_time, terminal_state, and constants {A, B, provenance} for the
/// sampled filter. Absent values are null.
nlohmann::ordered_json summary_json(const RunSummary& summary);

struct RunResult {
  Trajectory trajectory;
  std::vector<int> solver_iterations;  // per row
  RunSummary summary;
};

/// Summary statistics of a trajectory. solver_iterations may be empty.
RunSummary summarize(const ScenarioConfig& config, const Trajectory& trajectory,
                     const std::vector<int>& solver_iterations = {},
                     const std::optional<LipschitzConstants>& constants = std::nullopt);

/// Closed loop from t = 0 to the horizon: one row per step (the last row is
/// not integrated). Stops early, keeping the failing row, when the filter
/// reports Infeasible, MaxIterations or CertificateRejected. Throws
/// ConfigError when the config is invalid.
RunResult run_scenario(const ScenarioConfig& config);

bool is_halt(StepStatus status);

/// Boundary points of the extent at x along n uniform ray angles.
std::vector<Point2> extent_outline(const ExtentFunction& extent, const Vector& x, std::size_t n = 128);

/// Header t,x1..xn,u1..um,min_boundary_h,filter_active,solve_ms,status and
/// one row per step; floats with 17 significant digits.
std::string trajectory_csv(const Trajectory& trajectory, std::size_t state_dim, std::size_t input_dim);

struct CsvTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<double> min_boundary_h;
};
CsvTrajectory parse_trajectory_csv(const std::string& text);

/// Line segments of the zero level set of h over a grid on [lower, upper].
std::vector<std::pair<Point2, Point2>> zero_contour(const SafeFunction& h, const Point2& lower, const Point2& upper,
                                                    std::size_t resolution = 200);

struct PlotInput {
  std::vector<Vector> states;
  std::optional<ScenarioConfig> config;  // safe set and extents are drawn only with a config
  std::size_t extent_stride = 100;
};

/// Self-contained SVG: safe-set zero contour, extent outlines every stride
/// steps and the center path.
std::string render_svg(const PlotInput& input);

/// Writes <name>.csv, <name>.json and <name>.svg as enabled in the config.
/// Returns the written paths. Throws IoError naming the path on failure.
std::vector<std::filesystem::path> emit_outputs(const ScenarioConfig& config, const RunResult& result,
                                                const std::filesystem::path& out_dir);

void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace eccbf::sim

#endif  // ECCBF_SIMULATION_HPP
