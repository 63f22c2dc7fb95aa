#include "eccbf/example1.hpp"
#include "eccbf/scenario.hpp"
#include "eccbf/simulation.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kInfeasibleHalt = 3;
constexpr int kMismatch = 4;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> horizon;
};

struct RunOutcome {
  int code = kOk;
  std::string text;
};

RunOutcome run_one(const std::string& path, const Overrides& ov, const std::filesystem::path& out_dir) {
  using namespace eccbf;
  RunOutcome r;
  try {
    sim::ScenarioConfig config = sim::load_config(path);
    if (ov.seed) config.seed = *ov.seed;
    if (ov.dt) config.dt = *ov.dt;
    if (ov.horizon) config.horizon = *ov.horizon;
    const auto result = sim::run_scenario(config);
    const auto files = sim::emit_outputs(config, result, out_dir);
    const auto& s = result.summary;
    char line[512];
    std::snprintf(line, sizeof line,
                  "%s: filter=%s steps=%zu min_boundary_h=%.6g min_center_h=%.6g active=%zu solve_ms(median)=%.3g",
                  s.scenario.c_str(), s.filter.c_str(), s.steps, s.min_boundary_h, s.min_center_h,
                  s.filter_active_steps, s.solve_ms.median);
    r.text = line;
    if (s.halt_status) {
      std::snprintf(line, sizeof line, " HALT %s at t=%.4f", to_string(*s.halt_status).c_str(), *s.halt_time);
      r.text += line;
      r.code = kInfeasibleHalt;
    }
    for (const auto& f : files) r.text += "\n  wrote " + f.string();
  } catch (const ConfigError& e) {
    r.code = kConfigError;
    r.text = std::string("config error: ") + e.what();
  } catch (const std::exception& e) {
    r.code = kFailure;
    r.text = path + ": " + e.what();
  }
  return r;
}

int worst(int a, int b) {
  // Config errors outrank halts, which outrank other failures.
  auto rank = [](int c) { return c == kConfigError ? 3 : c == kInfeasibleHalt ? 2 : c == kFailure ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

int cmd_run(const std::vector<std::string>& files, const Overrides& ov, const std::string& out_dir, unsigned jobs) {
  std::vector<RunOutcome> outcomes(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) outcomes[i] = run_one(files[i], ov, out_dir);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(files.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kOk;
  for (const auto& o : outcomes) {
    (o.code == kOk || o.code == kInfeasibleHalt ? std::cout : std::cerr) << o.text << "\n";
    code = worst(code, o.code);
  }
  return code;
}

int cmd_validate(const std::vector<std::string>& files) {
  int code = kOk;
  for (const auto& f : files) {
    try {
      eccbf::sim::load_config(f);
      std::cout << f << ": ok\n";
    } catch (const eccbf::ConfigError& e) {
      std::cerr << e.what() << "\n";
      code = kConfigError;
    }
  }
  return code;
}

int cmd_example1() {
  const auto report = eccbf::sim::run_example1_table();
  std::cout << report.table();
  std::cout << (report.ok() ? "all boundaries match the closed form\n" : "MISMATCH against the closed form\n");
  return report.ok() ? kOk : kMismatch;
}

int cmd_plot(const std::string& csv_path, const std::string& config_path, std::string out) {
  using namespace eccbf;
  try {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open '" + csv_path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    const auto traj = sim::parse_trajectory_csv(text.str());
    sim::PlotInput input;
    input.states = traj.states;
    if (!config_path.empty()) {
      input.config = sim::load_config(config_path);
      input.extent_stride = input.config->output.extent_stride;
    }
    if (out.empty()) out = std::filesystem::path(csv_path).replace_extension(".svg").string();
    sim::write_file(out, sim::render_svg(input));
    std::cout << "wrote " << out << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extent-compatible control barrier function simulator"};
  app.require_subcommand(1);

  std::vector<std::string> run_files;
  std::string out_dir = "out";
  Overrides ov;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "Simulate one or more scenario files");
  run->add_option("scenarios", run_files, "Scenario TOML files")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "Directory for CSV, JSON and SVG outputs")->capture_default_str();
  run->add_option("--seed", ov.seed, "Override the scenario seed");
  run->add_option("--dt", ov.dt, "Override the time step");
  run->add_option("--horizon", ov.horizon, "Override the horizon in seconds");
  run->add_option("--jobs,-j", jobs, "Scenario files simulated concurrently")->capture_default_str();

  auto* example1 = app.add_subcommand("example1", "Sampled-filter feasibility boundaries for the half-plane example");

  std::vector<std::string> validate_files;
  auto* validate = app.add_subcommand("validate", "Check scenario files without simulating");
  validate->add_option("scenarios", validate_files, "Scenario TOML files")->required()->check(CLI::ExistingFile);

  std::string csv_path, config_path, plot_out;
  auto* plot = app.add_subcommand("plot", "Render a trajectory CSV as SVG");
  plot->add_option("csv", csv_path, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--config", config_path, "Scenario file, for the safe set and extent outlines")
      ->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output SVG (default: CSV path with .svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) return cmd_run(run_files, ov, out_dir, jobs);
  if (*example1) return cmd_example1();
  if (*validate) return cmd_validate(validate_files);
  if (*plot) return cmd_plot(csv_path, config_path, plot_out);
  return kFailure;
}
