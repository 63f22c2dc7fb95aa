#include "eccbf/example1.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace eccbf::sim {

namespace {

struct Fixture {
  ControlAffineSystem sys;
  ExtentFunction extent;
  SafeFunction h;
  BoundaryNet reference;
  LipschitzConstants consts;
};

Fixture make_fixture(const Example1Setup& s) {
  Fixture f{ControlAffineSystem::single_integrator(2, s.input_bound), ExtentFunction::ball(1.0, 2),
            SafeFunction::halfspace(Vector(Point2(-1.0, 0.0)), 0.0), {}, LipschitzConstants::user(s.A, s.B)};
  f.reference = sample_boundary(f.extent, Vector::Zero(2), s.samples);
  return f;
}

FilterOutput solve_with(const Fixture& f, const Example1Setup& s, double x1, const Vector& k,
                        const qp::QpOptions& options) {
  const Vector x = Point2(x1, 0.0);
  const BoundaryNet net = transform_net(f.reference, Point2(x1, 0.0), 0.0);
  return filter_input(sampled_constraints(f.extent, f.h, net, f.consts, s.gamma, f.sys, x), k, s.input_bound,
                      options);
}

}  // namespace

BoundaryNet example1_net(const Example1Setup& setup) { return make_fixture(setup).reference; }

FilterOutput example1_solve(const Example1Setup& setup, double x1, const Vector& k, const qp::QpOptions& options) {
  return solve_with(make_fixture(setup), setup, x1, k, options);
}

double example1_closed_form(const Example1Setup& s, double tau) { return -(s.B / s.gamma + s.A) * tau; }

bool Example1Report::ok() const {
  if (!trend_monotone || rows.empty()) return false;
  for (const auto& r : rows)
    if (!(r.error <= tolerance)) return false;
  return true;
}

std::string Example1Report::table() const {
  std::ostringstream o;
  char line[256];
  std::snprintf(line, sizeof line, "%7s %6s %14s %14s %14s %10s  %s\n", "samples", "gamma", "tau", "closed_form",
                "bisection", "error", "u at boundary");
  o << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%7zu %6.2f %14.9f %14.9f %14.9f %10.2e  (%.6f, %.6f)\n", r.samples, r.gamma,
                  r.tau, r.closed_form, r.bisection, r.error, r.boundary_input.size() ? r.boundary_input[0] : NAN,
                  r.boundary_input.size() > 1 ? r.boundary_input[1] : NAN);
    o << line;
  }
  o << "trend toward -A tau as gamma grows: " << (trend_monotone ? "monotone" : "NOT monotone") << "\n";
  return o.str();
}

Example1Report run_example1_table(double tolerance) {
  Example1Report report;
  report.tolerance = tolerance;
  report.trend_monotone = true;
  qp::QpOptions options;
  options.tol = 1e-12;
  const Vector k0 = Vector::Zero(2);
  for (std::size_t n : {2u, 4u}) {
    double previous = -INFINITY;
    for (double gamma : {0.25, 0.5, 1.0}) {
      Example1Setup s;
      s.samples = n;
      s.gamma = gamma;
      const Fixture f = make_fixture(s);
      auto feasible = [&](double x1) { return solve_with(f, s, x1, k0, options).status == StepStatus::Ok; };

      double lo = -100.0, hi = 0.0;
      require(feasible(lo) && !feasible(hi), "example 1 bracket does not straddle the feasibility boundary");
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
      }
      Example1Row r;
      r.samples = n;
      r.gamma = gamma;
      r.tau = f.reference.tau;
      r.closed_form = example1_closed_form(s, r.tau);
      r.bisection = lo;
      r.error = std::abs(r.bisection - r.closed_form);
      r.boundary_input = solve_with(f, s, lo, k0, options).u;
      report.trend_monotone = report.trend_monotone && r.bisection > previous && r.bisection < -s.A * r.tau;
      previous = r.bisection;
      report.rows.push_back(r);
    }
  }
  return report;
}

}  // namespace eccbf::sim
