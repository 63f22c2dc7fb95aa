#ifndef ECCBF_DYNAMICS_HPP
#define ECCBF_DYNAMICS_HPP

#include "eccbf/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace eccbf {

struct SingleIntegrator {
  std::size_t dimension;  // x' = u
};

/// x = (x1, x2, phi), u = (v, omega).
struct Unicycle {};

struct CustomDynamics {
  std::function<Vector(const Vector&)> drift;
  std::function<Matrix(const Vector&)> actuation;
  std::size_t state_dimension;
  std::size_t input_dimension;
  std::optional<std::size_t> heading_index;  // wrapped to [-pi, pi) after each step
};

/// Control-affine system x' = f(x) + g(x) u with |u|_2 <= input_bound.
class ControlAffineSystem {
 public:
  using Kind = std::variant<SingleIntegrator, Unicycle, CustomDynamics>;

  static ControlAffineSystem single_integrator(std::size_t dimension, double input_bound);
  static ControlAffineSystem unicycle(double input_bound);
  static ControlAffineSystem custom(CustomDynamics dynamics, double input_bound);

  std::size_t state_dimension() const { return n_; }
  std::size_t input_dimension() const { return m_; }
  double input_bound() const { return input_bound_; }
  const Kind& kind() const { return kind_; }
  std::optional<std::size_t> heading_index() const;

  Vector drift(const Vector& x) const;
  Matrix actuation(const Vector& x) const;

 private:
  ControlAffineSystem(Kind kind, std::size_t n, std::size_t m, double input_bound)
      : kind_(std::move(kind)), n_(n), m_(m), input_bound_(input_bound) {}

  Kind kind_;
  std::size_t n_;
  std::size_t m_;
  double input_bound_;
};

/// One classical RK4 step with the input held constant over dt. Headings
/// are wrapped to [-pi, pi).
Vector step(const ControlAffineSystem& sys, const Vector& x, const Vector& u, double dt);

/// Scales u onto the ball of radius bound if it lies outside.
Vector clip_norm(const Vector& u, double bound);

// ---------------------------------------------------------------------------
// Nominal controllers
// ---------------------------------------------------------------------------

struct GoToGoal {
  Point2 goal;
  double position_gain = 1.0;  // single integrator gain, unicycle kv
  double heading_gain = 1.0;   // unicycle komega
};

struct WaypointCycle {
  std::vector<Point2> goals;
  double switch_radius = 0.1;
  double position_gain = 1.0;
  double heading_gain = 1.0;
};

struct ConstantInput {
  Vector input;
};

struct CustomNominal {
  std::function<Vector(const Vector&)> law;
};

/// Nominal feedback k(x). Waypoint cycling keeps the active waypoint index,
/// so a controller instance belongs to one simulation run.
class NominalController {
 public:
  using Kind = std::variant<GoToGoal, WaypointCycle, ConstantInput, CustomNominal>;

  explicit NominalController(Kind kind) : kind_(std::move(kind)) {}

  /// k(x), clipped to the system's input bound.
  Vector input(const ControlAffineSystem& sys, const Vector& x);
  const Kind& kind() const { return kind_; }
  std::size_t active_waypoint() const { return waypoint_; }

 private:
  Kind kind_;
  std::size_t waypoint_ = 0;
};

/// Proportional go-to-goal law without clipping. Unicycle:
/// v = kv |e| cos(e_theta), omega = komega e_theta.
Vector go_to_goal_law(const ControlAffineSystem& sys, const Vector& x, const Point2& goal,
                      double position_gain, double heading_gain);

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

enum class StepStatus { Ok, Unfiltered, Infeasible, MaxIterations, CertificateRejected };

std::string to_string(StepStatus status);

struct StepDiagnostics {
  bool filter_active = false;
  double min_boundary_h = 0.0;
  double center_h = 0.0;
  StepStatus status = StepStatus::Unfiltered;
  double solve_ms = 0.0;
};

/// Per-step record: state at t, the input held over [t, t + dt), diagnostics at t.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<StepDiagnostics> diagnostics;

  std::size_t size() const { return times.size(); }
  void append(double t, Vector x, Vector u, StepDiagnostics d);
};

}  // namespace eccbf

#endif  // ECCBF_DYNAMICS_HPP
