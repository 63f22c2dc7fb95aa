// Acceptance gate. Prints one PASS/FAIL line per criterion, with details on
// the lines above it, and exits nonzero when any criterion fails.

#include "eccbf/example1.hpp"
#include "eccbf/scenario.hpp"
#include "eccbf/sdp.hpp"
#include "eccbf/simulation.hpp"
#include "eccbf/sos.hpp"

#include "../support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>

using namespace eccbf;

namespace {

const std::filesystem::path kScenarios = ECCBF_SCENARIO_DIR;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void detail(const char* fmt, auto... args) {
  std::printf("  ");
  if constexpr (sizeof...(args) == 0)
    std::fputs(fmt, stdout);
  else
    std::printf(fmt, args...);
  std::printf("\n");
}

struct Gate {
  std::map<int, bool> results;
  void report(int id, const char* title, bool pass) {
    results[id] = pass;
    std::printf("AC%d %s: %s\n", id, pass ? "PASS" : "FAIL", title);
    std::fflush(stdout);
  }
};

std::map<std::string, sim::RunResult> g_runs;

const sim::RunResult& run_once(const std::string& name, std::size_t probe_points) {
  auto it = g_runs.find(name);
  if (it != g_runs.end()) return it->second;
  sim::ScenarioConfig c = sim::load_config((kScenarios / (name + ".toml")).string());
  c.probe_points = probe_points;
  const auto t0 = std::chrono::steady_clock::now();
  auto r = sim::run_scenario(c);
  detail("%s: %zu steps in %.1f s, min boundary h %.3e, min center h %.3e, active %zu, halts %zu", name.c_str(),
         r.summary.steps, seconds_since(t0), r.summary.min_boundary_h, r.summary.min_center_h,
         r.summary.filter_active_steps, r.summary.infeasible_halts);
  return g_runs.emplace(name, std::move(r)).first->second;
}

// ---------------------------------------------------------------------------

bool ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = sim::run_example1_table(1e-6);
  bool thresholds = report.rows.size() == 6;
  for (const auto& r : report.rows) {
    const double tau = r.samples == 2 ? 2.0 * std::sqrt(2.0) : 2.0 * std::sqrt(2.0 - std::sqrt(2.0));
    const double closed = -(2.0 / r.gamma + 1.0) * tau;
    const double err = std::abs(r.bisection - closed);
    thresholds = thresholds && err <= 1e-6;
    detail("n=%zu gamma=%.2f boundary %.9f closed form %.9f error %.1e", r.samples, r.gamma, r.bisection, closed, err);
  }
  bool inputs = true;
  for (double gamma : {0.25, 0.5, 1.0}) {
    sim::Example1Setup s;
    s.gamma = gamma;
    const double x1 = -(s.B / gamma + s.A) * 2.0 * std::sqrt(2.0 - std::sqrt(2.0));
    qp::QpOptions o;
    o.tol = 1e-12;
    const auto out = sim::example1_solve(s, x1 - 1e-9, Point2(1.0, 0.0), o);
    const double err = out.status == StepStatus::Ok ? (out.u - Vector(Point2(-gamma, 0.0))).norm() : INFINITY;
    inputs = inputs && err <= 1e-6;
    detail("4 samples, gamma=%.2f: u at boundary (%.6f, %.6f), expected (%.2f, 0), error %.3g [%s]", gamma,
           out.u.size() ? out.u[0] : NAN, out.u.size() ? out.u[1] : NAN, -gamma, err, to_string(out.status).c_str());
  }
  const double elapsed = seconds_since(t0);
  detail("thresholds %s, boundary inputs %s, runtime %.3f s", thresholds ? "ok" : "MISMATCH",
         inputs ? "ok" : "MISMATCH", elapsed);
  return thresholds && inputs && elapsed < 1.0;
}

bool ac2() {
  bool pass = true;
  for (const char* name : {"cs1_sos", "cs2_sampled200"}) {
    const auto c = sim::load_config((kScenarios / (std::string(name) + ".toml")).string());
    // ten times the filter's sample density; the SOS filter has no net, use the same probe
    const std::size_t probe = 10 * (c.filter.kind == sim::FilterSpec::Kind::Sampled ? c.filter.samples : 200);
    const auto t0 = std::chrono::steady_clock::now();
    const auto& r = run_once(name, probe);
    const double elapsed = seconds_since(t0);
    const bool ok = c.dt == 0.01 && c.horizon >= 30.0 && r.summary.min_boundary_h >= -1e-6 &&
                    r.summary.infeasible_halts == 0 && !r.summary.halt_status && elapsed < 120.0;
    detail("%s: probe %zu points, dt %.3g, horizon %.0f s -> %s", name, probe, c.dt, c.horizon, ok ? "ok" : "FAILED");
    pass = pass && ok;
  }
  return pass;
}

bool ac3() {
  const auto& none = run_once("cs1_none", 2000);
  const auto& zcbf = run_once("cs1_zcbf", 2000);
  const auto& sos = run_once("cs1_sos", 2000);
  auto load = [](const char* n) { return sim::load_config((kScenarios / (std::string(n) + ".toml")).string()); };
  const auto cn = load("cs1_none"), cz = load("cs1_zcbf"), cs = load("cs1_sos");
  const bool same_setup = cn.initial_state == cz.initial_state && cz.initial_state == cs.initial_state &&
                          cn.nominal == cz.nominal && cz.nominal == cs.nominal && cn.seed == cz.seed &&
                          cz.seed == cs.seed;
  const bool a = none.summary.min_boundary_h < -0.01;
  const bool b = zcbf.summary.min_center_h >= -1e-6 && zcbf.summary.min_boundary_h < -0.01;
  const bool c = sos.summary.min_center_h >= -1e-6 && sos.summary.min_boundary_h >= -1e-6;
  detail("same initial state and nominal controller: %s", same_setup ? "yes" : "NO");
  detail("no filter: min boundary h %.4f (%s)", none.summary.min_boundary_h, a ? "violates" : "UNEXPECTED");
  detail("zcbf: min center h %.2e, min boundary h %.4f (%s)", zcbf.summary.min_center_h, zcbf.summary.min_boundary_h,
         b ? "center safe, extent violates" : "UNEXPECTED");
  detail("sos: min center h %.4f, min boundary h %.2e (%s)", sos.summary.min_center_h, sos.summary.min_boundary_h,
         c ? "both safe" : "UNEXPECTED");
  return same_setup && a && b && c;
}

bool ac4() {
  std::mt19937_64 rng(20240601);
  double worst_oracle = 0, worst_enum = 0, worst_kkt = 0;
  int optimal = 0, rows_max = 0;
  for (int i = 0; i < 200; ++i) {
    const auto p = oracle::random_qp(rng, 8);
    rows_max = std::max(rows_max, static_cast<int>(p.rows.size()));
    qp::QpOptions o;
    o.method = qp::QpMethod::Dykstra;
    const auto d = qp::solve(p, o);
    if (d.status != qp::QpStatus::Optimal) continue;
    ++optimal;
    worst_oracle = std::max(worst_oracle, (d.u - qp::oracle_solve(p, 401).u).norm());
    worst_enum = std::max(worst_enum, (d.u - qp::solve_active_set(p).u).norm());
    worst_kkt = std::max(worst_kkt, oracle::kkt_residual(p, d.u));
  }
  detail("%d/200 optimal (up to %d rows); max |dykstra - grid| %.2e, max |dykstra - enumeration| %.2e, "
         "max KKT residual %.2e",
         optimal, rows_max, worst_oracle, worst_enum, worst_kkt);
  return optimal == 200 && worst_oracle <= 1e-3 && worst_enum <= 1e-7 && worst_kkt <= 1e-5;
}

bool ac5() {
  sdp::SdpProblem coupling;
  coupling.num_vars = 1;
  coupling.objective = Vector::Ones(1);
  coupling.eq_matrix = Matrix(0, 1);
  coupling.eq_rhs = Vector(0);
  Matrix off(2, 2), id = Matrix::Identity(2, 2);
  off << 0, 1, 1, 0;
  coupling.blocks.push_back({off, {{0, id}}});
  const auto c = sdp::solve_sdp(coupling);
  const bool c_ok = c.status == sdp::SdpStatus::Optimal && std::abs(c.v[0] - 1.0) <= 1e-6;
  detail("[[v,1],[1,v]] >= 0: v = %.9f [%s]", c.v[0], sdp::to_string(c.status).c_str());

  sdp::SdpProblem schur;
  schur.num_vars = 2;
  schur.objective = Vector(Point2(0, 1));
  schur.eq_matrix = Matrix(1, 2);
  schur.eq_matrix << 1, 0;
  schur.eq_rhs = Vector::Constant(1, 2.0);
  Matrix f0 = Matrix::Zero(2, 2), fu = off, fd = Matrix::Zero(2, 2);
  f0(0, 0) = 1;
  fd(1, 1) = 1;
  schur.blocks.push_back({f0, {{0, fu}, {1, fd}}});
  const auto s = sdp::solve_sdp(schur);
  const bool s_ok = s.status == sdp::SdpStatus::Optimal && std::abs(s.v[1] - 4.0) <= 1e-6;
  detail("Schur epigraph with u = 2: delta = %.9f [%s]", s.v[1], sdp::to_string(s.status).c_str());

  const MultiPoly y1 = MultiPoly::variable(2, 0), y2 = MultiPoly::variable(2, 1);
  const auto square = sos::find_gram((y1 + y2).pow(2));
  const auto negative = sos::find_gram(-(y1 * y1));
  detail("Gram search: (y1 + y2)^2 %s, -y1^2 %s", square.certified ? "certified" : "NOT certified",
         negative.certified ? "CERTIFIED" : "rejected");

  // Every certificate issued along a superellipse-in-disk path.
  const auto sys = ControlAffineSystem::unicycle(1.0);
  const auto E = ExtentFunction::superellipse4(1.5, 2.0, 0.2, 3, 2);
  const auto h = SafeFunction::ball(Point2::Zero(), 1.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-0.6, 0.6), ang(-3.1, 3.1), unit(-1.0, 1.0);
  int issued = 0, passed = 0;
  double worst_coeff = 0, worst_eig = INFINITY;
  for (int i = 0; i < 40; ++i) {
    const Vector x = Eigen::Vector3d(pos(rng), pos(rng), ang(rng));
    const auto r = sos::sos_filter_input(E, h, ClassKFunction::linear(10.0), ClassKFunction::linear(1.0), sys, x,
                                         Point2(unit(rng), unit(rng)));
    if (r.sdp.status != sdp::SdpStatus::Optimal) continue;
    ++issued;
    worst_coeff = std::max(worst_coeff, r.certificate.coefficient_error);
    worst_eig = std::min({worst_eig, r.certificate.q_min_eigenvalue, r.certificate.s_min_eigenvalue});
    if (r.certificate.coefficient_error <= 1e-6 && r.certificate.q_min_eigenvalue >= -1e-7 &&
        r.certificate.s_min_eigenvalue >= -1e-7)
      ++passed;
  }
  const auto& run = run_once("cs1_sos", 2000);
  std::size_t rejected = 0;
  for (const auto& d : run.trajectory.diagnostics) rejected += d.status == StepStatus::CertificateRejected;
  detail("random states: %d/%d certificates pass (max coefficient error %.2e, min eigenvalue %.2e)", passed, issued,
         worst_coeff, worst_eig);
  detail("closed loop: %zu certificates checked, %zu rejected", run.trajectory.size(), rejected);
  return c_ok && s_ok && square.certified && !negative.certified && issued == 40 && passed == issued &&
         rejected == 0;
}

bool ac6() {
  const auto ball = ExtentFunction::ball(1.0, 2);
  Eigen::Matrix2d P = Eigen::Vector2d(1.0 / (0.15 * 0.15), 1.0 / (0.1 * 0.1)).asDiagonal();
  const auto ellipse = ExtentFunction::ellipse(P, 3, 2);
  const auto circle = oracle::ellipse_points(Point2::Zero(), 1.0, 1.0, 40000);
  const auto ring = oracle::ellipse_points(Point2::Zero(), P(0, 0), P(1, 1), 40000);
  bool pass = true;
  for (std::size_t n = 2; n <= 256; n *= 2) {
    const auto nb = sample_boundary(ball, Vector::Zero(2), n);
    const auto ne = sample_boundary(ellipse, Vector::Zero(3), n);
    const double rb = oracle::covering_radius(nb.samples, circle);
    const double re = oracle::covering_radius(ne.samples, ring);
    const bool ok = rb <= nb.tau / 2.0 && re <= ne.tau / 2.0;
    pass = pass && ok;
    detail("n=%3zu ball: covering %.6f tau/2 %.6f | ellipse: covering %.6f tau/2 %.6f %s", n, rb, nb.tau / 2, re,
           ne.tau / 2, ok ? "" : "VIOLATED");
  }
  const double t2 = sample_boundary(ball, Vector::Zero(2), 2).tau;
  const double t4 = sample_boundary(ball, Vector::Zero(2), 4).tau;
  const double e2 = std::abs(t2 - 2.0 * std::sqrt(2.0)), e4 = std::abs(t4 - 2.0 * std::sqrt(2.0 - std::sqrt(2.0)));
  detail("unit circle: tau(2) = %.12f (error %.1e), tau(4) = %.12f (error %.1e)", t2, e2, t4, e4);
  return pass && e2 <= 1e-9 && e4 <= 1e-9;
}

bool ac7() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> pos(-1.0, 1.0), ang(-3.14, 3.14);
  Eigen::Matrix2d P;
  P << 44.444444444444443, 5.0, 5.0, 100.0;
  const std::vector<std::pair<std::string, ExtentFunction>> extents = {
      {"ball", ExtentFunction::ball(0.5, 3)},
      {"ellipse", ExtentFunction::ellipse(P, 3, 2)},
      {"superellipse", ExtentFunction::superellipse4(1.5, 2.0, 0.2, 3, 2)}};
  bool pass = true;
  for (const auto& [name, e] : extents) {
    double wx = 0, wy = 0;
    for (int i = 0; i < 100; ++i) {
      const Vector x = Eigen::Vector3d(pos(rng), pos(rng), ang(rng));
      const Vector y = Point2(x[0] + 0.3 * pos(rng), x[1] + 0.3 * pos(rng));
      wx = std::max(wx, oracle::relative_error(e.gradient_x(x, y),
                                               oracle::fd_gradient([&](const Vector& s) { return e.value(s, y); }, x)));
      wy = std::max(wy, oracle::relative_error(e.gradient_y(x, y),
                                               oracle::fd_gradient([&](const Vector& q) { return e.value(x, q); }, y)));
    }
    pass = pass && wx <= 1e-6 && wy <= 1e-6;
    detail("extent %-12s max relative error dE/dx %.2e, dE/dy %.2e", name.c_str(), wx, wy);
  }
  const std::vector<std::pair<std::string, SafeFunction>> safes = {
      {"halfspace", SafeFunction::halfspace(Point2(-1.0, 0.0), 0.0)},
      {"ball", SafeFunction::ball(Point2::Zero(), 1.0)},
      {"superellipse", SafeFunction::superellipse(Point2::Zero(), Point2(1.0, 0.4), 4)}};
  for (const auto& [name, h] : safes) {
    double w = 0;
    for (int i = 0; i < 100; ++i) {
      const Vector y = Point2(pos(rng), pos(rng));
      w = std::max(w, oracle::relative_error(h.gradient(y), oracle::fd_gradient([&](const Vector& q) { return h.value(q); }, y)));
    }
    pass = pass && w <= 1e-6;
    detail("safe set %-12s max relative error dh/dy %.2e", name.c_str(), w);
  }

  const auto sys = ControlAffineSystem::unicycle(2.0);
  const Vector u = Point2(1.0, 1.0);
  const double T = 2.0;
  auto error = [&](double dt) {
    Vector x = Vector::Zero(3);
    for (long i = 0, n = std::lround(T / dt); i < n; ++i) x = step(sys, x, u, dt);
    return (x.head(2) - Vector(Point2(std::sin(T), 1.0 - std::cos(T)))).norm();
  };
  const double ratio = error(0.2) / error(0.1);
  const bool order = ratio >= 16.0 * 0.7 && ratio <= 16.0 * 1.3;
  detail("RK4 error ratio under dt halving: %.3f", ratio);
  return pass && order;
}

bool ac8() {
  // Reported only. The hardware timing cannot be reproduced here.
  bool reported = true;
  for (const char* name : {"cs1_sos", "cs2_sampled200"}) {
    const auto& s = run_once(name, 2000).summary;
    reported = reported && std::isfinite(s.solve_ms.median) && s.solve_ms.max > 0.0;
    detail("%s solve time per step: min %.3f ms, median %.3f ms, max %.3f ms (not asserted)", name, s.solve_ms.min,
           s.solve_ms.median, s.solve_ms.max);
  }
  const auto c = sim::load_config((kScenarios / "cs2_sampled200.toml").string());
  const bool stand_in = c.safe.kind == sim::SafeSpec::Kind::Superellipse && c.safe.exponent == 4 &&
                        c.safe.semi_axes == Point2(1.0, 0.4);
  detail("robot hardware run and its 10-15 ms figure: not reproducible on this machine");
  detail("second case study safe set: degree-4 superellipse with semi-axes (1, 0.4) in place of the cited Lp set: %s",
         stand_in ? "yes" : "NO");
  return reported && stand_in;
}

}  // namespace

int main() {
  Gate gate;
  const std::vector<std::tuple<int, const char*, std::function<bool()>>> criteria = {
      {1, "half-plane feasibility thresholds and boundary input", ac1},
      {2, "extent stays in the safe set (SOS disk, 200-sample ellipse)", ac2},
      {3, "baseline separation (none / zcbf / sos)", ac3},
      {4, "QP solver against grid oracle and enumeration", ac4},
      {5, "SDP and SOS golden cases and certificates", ac5},
      {6, "boundary net covering certificates", ac6},
      {7, "gradient and integrator order checks", ac7},
      {8, "timing and safe-set substitution reported, not asserted", ac8},
  };
  for (const auto& [id, title, fn] : criteria) {
    std::printf("AC%d ...\n", id);
    bool pass = false;
    try {
      pass = fn();
    } catch (const std::exception& e) {
      detail("exception: %s", e.what());
    }
    gate.report(id, title, pass);
  }
  int failed = 0;
  for (const auto& [id, pass] : gate.results) failed += pass ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(gate.results.size()) - failed, gate.results.size());
  return failed == 0 ? 0 : 1;
}
