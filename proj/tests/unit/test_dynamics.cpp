#include "eccbf/dynamics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace eccbf;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("unicycle actuation") {
  const auto sys = ControlAffineSystem::unicycle(1.0);
  Matrix expected(3, 2);
  expected << 1, 0, 0, 0, 0, 1;
  CHECK(sys.actuation(Vector::Zero(3)).isApprox(expected));
  CHECK(sys.drift(Vector::Zero(3)).isZero());
  const Matrix g = sys.actuation(Eigen::Vector3d(0, 0, pi / 2));
  CHECK(g.col(0).isApprox(Eigen::Vector3d(0, 1, 0), 1e-15));
  CHECK(std::abs(g(0, 0)) < 1e-15);
  CHECK_THROWS_AS(sys.drift(Vector::Zero(2)), ContractViolation);
}

TEST_CASE("single integrator") {
  const auto sys = ControlAffineSystem::single_integrator(2, 1.0);
  const Vector x = Point2(3.0, -1.0);
  CHECK(sys.drift(x).isZero());
  CHECK(sys.actuation(x).isApprox(Matrix::Identity(2, 2)));
  CHECK(step(sys, Point2(0, 0), Point2(1, 0), 0.1).isApprox(Vector(Point2(0.1, 0)), 1e-15));
}

TEST_CASE("unicycle steps") {
  const auto sys = ControlAffineSystem::unicycle(4.0);
  CHECK(step(sys, Vector::Zero(3), Point2(1, 0), 0.5).isApprox(Vector(Eigen::Vector3d(0.5, 0, 0)), 1e-15));
  const Vector turned = step(sys, Vector::Zero(3), Point2(0, pi), 1.0);
  CHECK(turned.head(2).norm() < 1e-15);
  CHECK(std::abs(std::abs(turned[2]) - pi) <= 1e-6);
  CHECK(turned[2] >= -pi);
  CHECK(turned[2] < pi);
}

TEST_CASE("heading wrap range") {
  for (double a : {-10.0, -pi, -1.0, 0.0, 3.0, pi, 7.5, 100.0}) {
    const double w = wrap_angle(a);
    CHECK(w >= -pi);
    CHECK(w < pi);
    CHECK(std::abs(std::remainder(w - a, 2.0 * pi)) < 1e-12);
  }
  CHECK(wrap_angle(pi) == doctest::Approx(-pi));
}

TEST_CASE("RK4 is fourth order on circular motion") {
  const auto sys = ControlAffineSystem::unicycle(2.0);
  const Vector u = Point2(1.0, 1.0);
  const double T = 2.0;
  const Eigen::Vector3d exact(std::sin(T), 1.0 - std::cos(T), T);
  auto error = [&](double dt) {
    Vector x = Vector::Zero(3);
    const int steps = static_cast<int>(std::lround(T / dt));
    for (int i = 0; i < steps; ++i) x = step(sys, x, u, dt);
    return (x.head(2) - exact.head(2)).norm();
  };
  const double ratio = error(0.2) / error(0.1);
  CHECK(ratio >= 16.0 * 0.7);
  CHECK(ratio <= 16.0 * 1.3);
}

TEST_CASE("step rejects bad inputs") {
  const auto sys = ControlAffineSystem::single_integrator(2, 1.0);
  CHECK_THROWS_AS(step(sys, Point2(NAN, 0), Point2(0, 0), 0.1), NumericError);
  CHECK_THROWS_AS(step(sys, Point2(0, 0), Point2(2, 0), 0.1), ContractViolation);
  CHECK_THROWS_AS(step(sys, Point2(0, 0), Point2(0, 0), 0.0), ContractViolation);
}

TEST_CASE("nominal controllers") {
  const auto si = ControlAffineSystem::single_integrator(2, 5.0);
  NominalController at_goal(GoToGoal{Point2(0.3, 0.4), 1.0, 1.0});
  CHECK(at_goal.input(si, Point2(0.3, 0.4)).isZero());
  NominalController toward(GoToGoal{Point2(1, 0), 1.0, 1.0});
  CHECK(toward.input(si, Point2(0, 0)).isApprox(Vector(Point2(1, 0))));

  const auto uni = ControlAffineSystem::unicycle(1.0);
  NominalController turn(GoToGoal{Point2(0, 1), 1.0, 1.0});
  const Vector k = turn.input(uni, Vector::Zero(3));
  // heading error pi/2: cos is 0 so v vanishes up to rounding; omega turns left
  CHECK(k[1] > 0.0);
  NominalController ahead(GoToGoal{Point2(1, 1), 1.0, 1.0});
  CHECK(ahead.input(uni, Vector::Zero(3))[0] > 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  NominalController far(GoToGoal{Point2(40, -30), 3.0, 3.0});
  for (int i = 0; i < 100; ++i) {
    CHECK(far.input(uni, Eigen::Vector3d(pos(rng), pos(rng), pos(rng))).norm() <= 1.0 + 1e-12);
    CHECK(far.input(si, Point2(pos(rng), pos(rng))).norm() <= 5.0 + 1e-12);
  }
}

TEST_CASE("waypoint cycle advances inside the switch radius") {
  const auto si = ControlAffineSystem::single_integrator(2, 1.0);
  NominalController k(WaypointCycle{{Point2(1, 0), Point2(0, 1)}, 0.1, 1.0, 1.0});
  CHECK(k.active_waypoint() == 0);
  k.input(si, Point2(0.95, 0));
  CHECK(k.active_waypoint() == 1);
  k.input(si, Point2(0, 0.95));
  CHECK(k.active_waypoint() == 0);
}

TEST_CASE("trajectory timestamps must increase") {
  Trajectory t;
  t.append(0.0, Point2(0, 0), Point2(0, 0), {});
  CHECK_THROWS_AS(t.append(0.0, Point2(0, 0), Point2(0, 0), {}), ContractViolation);
  CHECK(t.size() == 1);
}
