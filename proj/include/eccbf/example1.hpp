#ifndef ECCBF_EXAMPLE1_HPP
#define ECCBF_EXAMPLE1_HPP

#include "eccbf/safety_filters.hpp"

#include <string>
#include <vector>

namespace eccbf::sim {

/// Planar single integrator with M = 1, unit-disk extent E = |x - y|^2 - 1,
/// safe set h(y) = -y1 and user constants A = 1, B = 2. Nets use uniform
/// angles offset by half a step, so n = 2 gives (x1, x2 +- 1) and n = 4 the
/// diagonal points.
struct Example1Setup {
  std::size_t samples = 4;
  double gamma = 1.0;
  double A = 1.0;
  double B = 2.0;
  double input_bound = 1.0;
};

/// Net at the reference pose (tau measured by dense probing).
BoundaryNet example1_net(const Example1Setup& setup);

/// Filter output at x = (x1, 0) for nominal input k.
FilterOutput example1_solve(const Example1Setup& setup, double x1, const Vector& k,
                            const qp::QpOptions& options = {});

/// -(B / gamma + A) tau with the net's tau.
double example1_closed_form(const Example1Setup& setup, double tau);

struct Example1Row {
  std::size_t samples = 0;
  double gamma = 0.0;
  double tau = 0.0;
  double closed_form = 0.0;
  double bisection = 0.0;  // largest feasible x1 found
  double error = 0.0;
  Vector boundary_input;   // filter output at the bisection point with k = 0
};

struct Example1Report {
  std::vector<Example1Row> rows;
  double tolerance = 1e-6;
  bool trend_monotone = false;  // boundaries rise toward -A tau as gamma grows
  bool ok() const;
  std::string table() const;
};

/// Bisects x1 in [-100, 0] for n in {2, 4} and gamma in {0.25, 0.5, 1}.
Example1Report run_example1_table(double tolerance = 1e-6);

}  // namespace eccbf::sim

#endif  // ECCBF_EXAMPLE1_HPP
