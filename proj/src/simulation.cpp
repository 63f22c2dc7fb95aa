#include "eccbf/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace eccbf::sim {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<double> uniform_angles(std::size_t n) {
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i)
    angles[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
  return angles;
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

// Dense boundary probe, traced once at the reference pose for rigid extents.
class BoundaryProbe {
 public:
  BoundaryProbe(const ExtentFunction& extent, const Vector& x0, std::size_t n)
      : extent_(extent), angles_(uniform_angles(n)) {
    if (extent_.is_rigid()) reference_ = trace_boundary(extent_, reference_pose(extent_, x0), angles_);
  }

  std::vector<Point2> at(const Vector& x) const {
    if (reference_.empty()) return trace_boundary(extent_, x, angles_);
    const Eigen::Rotation2Dd rot(extent_.heading(x));
    const Point2 c = extent_.center(x).head<2>();
    std::vector<Point2> out;
    out.reserve(reference_.size());
    for (const Point2& p : reference_) out.push_back(c + rot * p);
    return out;
  }

 private:
  const ExtentFunction& extent_;
  std::vector<double> angles_;
  std::vector<Point2> reference_;
};

}  // namespace

bool is_halt(StepStatus status) {
  return status == StepStatus::Infeasible || status == StepStatus::MaxIterations ||
         status == StepStatus::CertificateRejected;
}

nlohmann::ordered_json summary_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["filter"] = s.filter;
  j["steps"] = s.steps;
  j["dt"] = s.dt;
  j["horizon"] = s.horizon;
  j["min_boundary_h"] = json_number(s.min_boundary_h);
  j["min_center_h"] = json_number(s.min_center_h);
  j["filter_active_steps"] = s.filter_active_steps;
  j["infeasible_halts"] = s.infeasible_halts;
  j["halt_status"] = s.halt_status ? nlohmann::ordered_json(to_string(*s.halt_status)) : nullptr;
  j["halt_time"] = s.halt_time ? nlohmann::ordered_json(*s.halt_time) : nullptr;
  j["solve_ms"] = {{"min", s.solve_ms.min}, {"median", s.solve_ms.median}, {"max", s.solve_ms.max}};
  j["max_solver_iterations"] = s.max_solver_iterations;
  j["terminal_time"] = s.terminal_time;
  j["terminal_state"] = std::vector<double>(s.terminal_state.data(), s.terminal_state.data() + s.terminal_state.size());
  if (s.constants) {
    j["constants"] = {{"A", s.constants->A},
                      {"B", s.constants->B},
                      {"provenance", s.constants->provenance == ConstantsProvenance::UserSupplied ? "user"
                                                                                                  : "grid_estimated"}};
  } else {
    j["constants"] = nullptr;
  }
  return j;
}

RunSummary summarize(const ScenarioConfig& config, const Trajectory& traj, const std::vector<int>& iterations,
                     const std::optional<LipschitzConstants>& constants) {
  RunSummary s;
  s.scenario = config.name;
  s.filter = to_string(config.filter.kind);
  s.steps = traj.size();
  s.dt = config.dt;
  s.horizon = config.horizon;
  s.constants = constants;
  s.min_boundary_h = std::numeric_limits<double>::infinity();
  s.min_center_h = std::numeric_limits<double>::infinity();
  std::vector<double> times;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& d = traj.diagnostics[i];
    s.min_boundary_h = std::min(s.min_boundary_h, d.min_boundary_h);
    s.min_center_h = std::min(s.min_center_h, d.center_h);
    if (d.filter_active) ++s.filter_active_steps;
    if (is_halt(d.status)) {
      s.halt_status = d.status;
      s.halt_time = traj.times[i];
      if (d.status == StepStatus::Infeasible) ++s.infeasible_halts;
    }
    times.push_back(d.solve_ms);
  }
  if (!times.empty()) {
    std::sort(times.begin(), times.end());
    const std::size_t n = times.size();
    s.solve_ms = {times.front(), n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]), times.back()};
  }
  for (int it : iterations) s.max_solver_iterations = std::max(s.max_solver_iterations, it);
  if (traj.size() > 0) {
    s.terminal_time = traj.times.back();
    s.terminal_state = traj.states.back();
  }
  return s;
}

RunResult run_scenario(const ScenarioConfig& config) {
  const auto errors = validate_config(config);
  if (!errors.empty()) {
    std::string msg = config.name + ": invalid scenario";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }

  const ControlAffineSystem sys = make_system(config);
  const ExtentFunction extent = make_extent(config);
  const SafeFunction h = make_safe(config);
  NominalController nominal = make_nominal(config);
  BuiltFilter built = make_filter(config);
  Vector x = make_initial_state(config);
  const BoundaryProbe probe(extent, x, config.probe_points);

  const auto steps = static_cast<std::size_t>(std::llround(config.horizon / config.dt));
  RunResult result;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * config.dt;
    const Vector k = nominal.input(sys, x);

    const auto start = std::chrono::steady_clock::now();
    const FilterOutput out = built.filter->apply(x, k);
    const auto stop = std::chrono::steady_clock::now();

    StepDiagnostics d;
    d.filter_active = out.active;
    d.status = out.status;
    d.solve_ms = config.output.record_timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
    const auto boundary = probe.at(x);
    d.min_boundary_h = min_safe_value(h, boundary);
    d.center_h = h.value(Point2(extent.center(x).head<2>()));

    result.trajectory.append(t, x, out.u, d);
    result.solver_iterations.push_back(out.iterations);
    if (is_halt(out.status) || i == steps) break;
    x = step(sys, x, out.u, config.dt);
  }
  result.summary = summarize(config, result.trajectory, result.solver_iterations, built.constants);
  return result;
}

std::vector<Point2> extent_outline(const ExtentFunction& extent, const Vector& x, std::size_t n) {
  return trace_boundary(extent, x, uniform_angles(n), kernels::Exec::Serial);
}

std::string trajectory_csv(const Trajectory& traj, std::size_t state_dim, std::size_t input_dim) {
  std::ostringstream o;
  o << "t";
  for (std::size_t i = 1; i <= state_dim; ++i) o << ",x" << i;
  for (std::size_t i = 1; i <= input_dim; ++i) o << ",u" << i;
  o << ",min_boundary_h,filter_active,solve_ms,status\n";
  for (std::size_t r = 0; r < traj.size(); ++r) {
    require(static_cast<std::size_t>(traj.states[r].size()) == state_dim &&
                static_cast<std::size_t>(traj.inputs[r].size()) == input_dim,
            "trajectory row dimensions differ from the header");
    o << fmt17(traj.times[r]);
    for (Eigen::Index i = 0; i < traj.states[r].size(); ++i) o << ',' << fmt17(traj.states[r][i]);
    for (Eigen::Index i = 0; i < traj.inputs[r].size(); ++i) o << ',' << fmt17(traj.inputs[r][i]);
    const auto& d = traj.diagnostics[r];
    o << ',' << fmt17(d.min_boundary_h) << ',' << (d.filter_active ? 1 : 0) << ',' << fmt17(d.solve_ms) << ','
      << to_string(d.status) << '\n';
  }
  return o.str();
}

CsvTrajectory parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trajectory CSV is empty");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) header.push_back(col);
  }
  if (header.empty() || header.front() != "t") throw ConfigError("trajectory CSV header must start with 't'");
  std::vector<std::size_t> xs, us;
  std::optional<std::size_t> hcol;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& c = header[i];
    if (c.size() > 1 && c[0] == 'x' && std::isdigit(static_cast<unsigned char>(c[1]))) xs.push_back(i);
    if (c.size() > 1 && c[0] == 'u' && std::isdigit(static_cast<unsigned char>(c[1]))) us.push_back(i);
    if (c == "min_boundary_h") hcol = i;
  }
  if (xs.size() < 2) throw ConfigError("trajectory CSV needs at least columns x1 and x2");

  CsvTrajectory out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size())
      throw ConfigError("trajectory CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " fields, header has " + std::to_string(header.size()));
    auto num = [&](std::size_t i) {
      try {
        return std::stod(cells[i]);
      } catch (const std::exception&) {
        throw ConfigError("trajectory CSV row " + std::to_string(row) + ": '" + cells[i] + "' is not a number");
      }
    };
    out.times.push_back(num(0));
    Vector x(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) x[static_cast<Eigen::Index>(i)] = num(xs[i]);
    Vector u(static_cast<Eigen::Index>(us.size()));
    for (std::size_t i = 0; i < us.size(); ++i) u[static_cast<Eigen::Index>(i)] = num(us[i]);
    out.states.push_back(x);
    out.inputs.push_back(u);
    out.min_boundary_h.push_back(hcol ? num(*hcol) : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

std::vector<std::pair<Point2, Point2>> zero_contour(const SafeFunction& h, const Point2& lower, const Point2& upper,
                                                    std::size_t resolution) {
  require(resolution >= 2, "contour grid needs at least 2 cells per axis");
  const std::size_t n = resolution + 1;
  const Point2 step = (upper - lower) / static_cast<double>(resolution);
  auto node = [&](std::size_t i, std::size_t j) {
    return Point2(lower[0] + static_cast<double>(i) * step[0], lower[1] + static_cast<double>(j) * step[1]);
  };
  std::vector<double> v(n * n);
  kernels::for_each_index(n * n, [&](std::size_t idx) { v[idx] = h.value(node(idx / n, idx % n)); });
  auto val = [&](std::size_t i, std::size_t j) { return v[i * n + j]; };

  std::vector<std::pair<Point2, Point2>> segments;
  for (std::size_t i = 0; i < resolution; ++i) {
    for (std::size_t j = 0; j < resolution; ++j) {
      // Corners counter-clockwise from (i, j).
      const std::size_t ci[4] = {i, i + 1, i + 1, i};
      const std::size_t cj[4] = {j, j, j + 1, j + 1};
      std::vector<Point2> hits;
      for (int e = 0; e < 4; ++e) {
        const int f = (e + 1) % 4;
        const double a = val(ci[e], cj[e]);
        const double b = val(ci[f], cj[f]);
        if ((a >= 0.0) != (b >= 0.0)) {
          const double s = a / (a - b);
          hits.push_back(node(ci[e], cj[e]) + s * (node(ci[f], cj[f]) - node(ci[e], cj[e])));
        }
      }
      if (hits.size() == 2) {
        segments.emplace_back(hits[0], hits[1]);
      } else if (hits.size() == 4) {
        // Saddle: decide the pairing by the cell-center value.
        const double center = h.value(Point2(node(i, j) + 0.5 * step));
        if ((center >= 0.0) == (val(i, j) >= 0.0)) {
          segments.emplace_back(hits[0], hits[3]);
          segments.emplace_back(hits[1], hits[2]);
        } else {
          segments.emplace_back(hits[0], hits[1]);
          segments.emplace_back(hits[2], hits[3]);
        }
      }
    }
  }
  return segments;
}

std::string render_svg(const PlotInput& input) {
  std::vector<std::vector<Point2>> outlines;
  std::vector<std::pair<Point2, Point2>> contour;
  Point2 lo = Point2::Constant(std::numeric_limits<double>::infinity());
  Point2 hi = -lo;
  auto grow = [&](const Point2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  for (const auto& x : input.states) grow(x.head<2>());

  if (input.config) {
    const auto& c = *input.config;
    grow(c.domain_lower);
    grow(c.domain_upper);
    const ExtentFunction extent = make_extent(c);
    const std::size_t stride = std::max<std::size_t>(1, input.extent_stride);
    for (std::size_t i = 0; i < input.states.size(); i += stride) {
      outlines.push_back(extent_outline(extent, input.states[i]));
      for (const auto& p : outlines.back()) grow(p);
    }
    if (!input.states.empty() && (input.states.size() - 1) % stride != 0) {
      outlines.push_back(extent_outline(extent, input.states.back()));
      for (const auto& p : outlines.back()) grow(p);
    }
  }
  if (!std::isfinite(lo[0])) {
    lo = Point2(-1.0, -1.0);
    hi = Point2(1.0, 1.0);
  }
  const Point2 pad = 0.05 * (hi - lo).cwiseMax(Point2(1e-3, 1e-3));
  lo -= pad;
  hi += pad;
  if (input.config) contour = zero_contour(make_safe(*input.config), lo, hi);

  const double width = 800.0;
  const double scale = width / (hi[0] - lo[0]);
  const double height = (hi[1] - lo[1]) * scale;
  auto sx = [&](const Point2& p) { return fmt4((p[0] - lo[0]) * scale); };
  auto sy = [&](const Point2& p) { return fmt4((hi[1] - p[1]) * scale); };
  auto px = [&](const Point2& p) { return sx(p) + "," + sy(p); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt4(width) << "\" height=\"" << fmt4(height)
    << "\" viewBox=\"0 0 " << fmt4(width) << ' ' << fmt4(height) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!contour.empty()) {
    o << "<g id=\"safe-set\" stroke=\"black\" stroke-width=\"2\">\n";
    for (const auto& [a, b] : contour) {
      o << "<line x1=\"" << sx(a) << "\" y1=\"" << sy(a) << "\" x2=\"" << sx(b) << "\" y2=\"" << sy(b) << "\"/>\n";
    }
    o << "</g>\n";
  }
  if (!outlines.empty()) {
    o << "<g id=\"extents\" fill=\"steelblue\" fill-opacity=\"0.15\" stroke=\"steelblue\" stroke-width=\"1\">\n";
    for (const auto& outline : outlines) {
      o << "<polygon points=\"";
      for (std::size_t i = 0; i < outline.size(); ++i) o << (i ? " " : "") << px(outline[i]);
      o << "\"/>\n";
    }
    o << "</g>\n";
  }
  if (!input.states.empty()) {
    o << "<polyline id=\"path\" fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < input.states.size(); ++i) o << (i ? " " : "") << px(input.states[i].head<2>());
    o << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << contents;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<std::filesystem::path> emit_outputs(const ScenarioConfig& config, const RunResult& result,
                                                const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  const ControlAffineSystem sys = make_system(config);
  std::vector<std::filesystem::path> written;
  const std::filesystem::path base = out_dir / config.name;
  if (config.output.csv) {
    auto p = base;
    p += ".csv";
    write_file(p, trajectory_csv(result.trajectory, sys.state_dimension(), sys.input_dimension()));
    written.push_back(p);
  }
  if (config.output.summary) {
    auto p = base;
    p += ".json";
    write_file(p, summary_json(result.summary).dump(2) + "\n");
    written.push_back(p);
  }
  if (config.output.svg) {
    auto p = base;
    p += ".svg";
    write_file(p, render_svg({result.trajectory.states, config, config.output.extent_stride}));
    written.push_back(p);
  }
  return written;
}

}  // namespace eccbf::sim
