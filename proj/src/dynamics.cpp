#include "eccbf/dynamics.hpp"

#include <cmath>

namespace eccbf {

ControlAffineSystem ControlAffineSystem::single_integrator(std::size_t dimension, double input_bound) {
  require(dimension > 0, "single integrator dimension must be positive");
  require(input_bound > 0.0, "input bound must be positive");
  return ControlAffineSystem(SingleIntegrator{dimension}, dimension, dimension, input_bound);
}

ControlAffineSystem ControlAffineSystem::unicycle(double input_bound) {
  require(input_bound > 0.0, "input bound must be positive");
  return ControlAffineSystem(Unicycle{}, 3, 2, input_bound);
}

ControlAffineSystem ControlAffineSystem::custom(CustomDynamics dynamics, double input_bound) {
  require(input_bound > 0.0, "input bound must be positive");
  require(dynamics.drift && dynamics.actuation, "custom dynamics needs drift and actuation callbacks");
  require(dynamics.state_dimension > 0 && dynamics.input_dimension > 0, "custom dynamics dimensions must be positive");
  const auto n = dynamics.state_dimension;
  const auto m = dynamics.input_dimension;
  return ControlAffineSystem(std::move(dynamics), n, m, input_bound);
}

std::optional<std::size_t> ControlAffineSystem::heading_index() const {
  if (std::holds_alternative<Unicycle>(kind_)) return 2;
  if (const auto* c = std::get_if<CustomDynamics>(&kind_)) return c->heading_index;
  return std::nullopt;
}

Vector ControlAffineSystem::drift(const Vector& x) const {
  require(static_cast<std::size_t>(x.size()) == n_, "drift: state dimension mismatch");
  if (const auto* c = std::get_if<CustomDynamics>(&kind_)) {
    Vector f = c->drift(x);
    require(static_cast<std::size_t>(f.size()) == n_, "custom drift returned wrong dimension");
    return f;
  }
  return Vector::Zero(static_cast<Eigen::Index>(n_));
}

Matrix ControlAffineSystem::actuation(const Vector& x) const {
  require(static_cast<std::size_t>(x.size()) == n_, "actuation: state dimension mismatch");
  const auto n = static_cast<Eigen::Index>(n_);
  const auto m = static_cast<Eigen::Index>(m_);
  if (std::holds_alternative<SingleIntegrator>(kind_)) return Matrix::Identity(n, m);
  if (std::holds_alternative<Unicycle>(kind_)) {
    Matrix g = Matrix::Zero(3, 2);
    g(0, 0) = std::cos(x[2]);
    g(1, 0) = std::sin(x[2]);
    g(2, 1) = 1.0;
    return g;
  }
  Matrix g = std::get<CustomDynamics>(kind_).actuation(x);
  require(g.rows() == n && g.cols() == m, "custom actuation returned wrong shape");
  return g;
}

Vector step(const ControlAffineSystem& sys, const Vector& x, const Vector& u, double dt) {
  require(dt > 0.0, "step size must be positive");
  require(static_cast<std::size_t>(u.size()) == sys.input_dimension(), "step: input dimension mismatch");
  if (!x.allFinite() || !u.allFinite()) throw NumericError("non-finite state or input");
  require(u.norm() <= sys.input_bound() + 1e-9, "input exceeds the system's input bound");
  auto rhs = [&](const Vector& s) -> Vector { return sys.drift(s) + sys.actuation(s) * u; };
  const Vector k1 = rhs(x);
  const Vector k2 = rhs(x + 0.5 * dt * k1);
  const Vector k3 = rhs(x + 0.5 * dt * k2);
  const Vector k4 = rhs(x + dt * k3);
  Vector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (auto h = sys.heading_index()) next[static_cast<Eigen::Index>(*h)] = wrap_angle(next[static_cast<Eigen::Index>(*h)]);
  if (!next.allFinite()) throw NumericError("integration produced a non-finite state");
  return next;
}

Vector clip_norm(const Vector& u, double bound) {
  const double n = u.norm();
  if (n <= bound) return u;
  return u * (bound / n);
}

Vector go_to_goal_law(const ControlAffineSystem& sys, const Vector& x, const Point2& goal,
                      double position_gain, double heading_gain) {
  if (std::holds_alternative<Unicycle>(sys.kind())) {
    const Point2 e = goal - x.head<2>();
    const double dist = e.norm();
    Vector u = Vector::Zero(2);
    if (dist < 1e-12) return u;
    const double heading_error = wrap_angle(std::atan2(e[1], e[0]) - x[2]);
    u[0] = position_gain * dist * std::cos(heading_error);
    u[1] = heading_gain * heading_error;
    return u;
  }
  require(sys.input_dimension() == sys.state_dimension() && sys.state_dimension() >= 2,
          "go-to-goal needs a unicycle or a fully actuated planar system");
  Vector u = Vector::Zero(static_cast<Eigen::Index>(sys.input_dimension()));
  u.head<2>() = position_gain * (goal - x.head<2>());
  return u;
}

Vector NominalController::input(const ControlAffineSystem& sys, const Vector& x) {
  Vector u = std::visit(
      [&](auto& k) -> Vector {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GoToGoal>) {
          return go_to_goal_law(sys, x, k.goal, k.position_gain, k.heading_gain);
        } else if constexpr (std::is_same_v<K, WaypointCycle>) {
          require(!k.goals.empty(), "waypoint cycle needs at least one goal");
          if ((k.goals[waypoint_] - x.head<2>()).norm() < k.switch_radius)
            waypoint_ = (waypoint_ + 1) % k.goals.size();
          return go_to_goal_law(sys, x, k.goals[waypoint_], k.position_gain, k.heading_gain);
        } else if constexpr (std::is_same_v<K, ConstantInput>) {
          return k.input;
        } else {
          return k.law(x);
        }
      },
      kind_);
  require(static_cast<std::size_t>(u.size()) == sys.input_dimension(), "nominal input has wrong dimension");
  return clip_norm(u, sys.input_bound());
}

std::string to_string(StepStatus status) {
  switch (status) {
    case StepStatus::Ok: return "ok";
    case StepStatus::Unfiltered: return "unfiltered";
    case StepStatus::Infeasible: return "infeasible";
    case StepStatus::MaxIterations: return "max_iterations";
    case StepStatus::CertificateRejected: return "certificate_rejected";
  }
  return "unknown";
}

void Trajectory::append(double t, Vector x, Vector u, StepDiagnostics d) {
  require(times.empty() || t > times.back(), "trajectory timestamps must increase");
  times.push_back(t);
  states.push_back(std::move(x));
  inputs.push_back(std::move(u));
  diagnostics.push_back(d);
}

}  // namespace eccbf
