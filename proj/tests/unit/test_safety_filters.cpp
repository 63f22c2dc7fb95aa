#include "eccbf/example1.hpp"
#include "eccbf/safety_filters.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace eccbf;
using namespace eccbf::sim;

namespace {

const double kSqrt2 = std::sqrt(2.0);

LinearInputConstraint row_for(const std::vector<LinearInputConstraint>& rows, const Vector& a) {
  for (const auto& r : rows)
    if ((r.a - a).norm() < 1e-9) return r;
  FAIL("no row with the expected normal");
  return {};
}

}  // namespace

TEST_CASE("class K functions") {
  for (const auto& alpha : {ClassKFunction::linear(0.5), ClassKFunction::cubic(2.0)}) {
    CHECK(alpha(0.0) == 0.0);
    double previous = alpha(-3.0);
    for (int i = 1; i <= 600; ++i) {
      const double v = alpha(-3.0 + 0.01 * i);
      CHECK(v > previous);
      previous = v;
    }
  }
}

TEST_CASE("point-mass barrier rows") {
  const auto sys = ControlAffineSystem::single_integrator(2, 1.0);
  const auto h = SafeFunction::ball(Point2::Zero(), 1.0);  // 1 - |x|^2
  const auto alpha = ClassKFunction::linear(1.0);
  auto c = zcbf_constraint(h, alpha, sys, Point2(0, 0));
  CHECK(c.a.isZero());
  CHECK(c.b == doctest::Approx(-1.0));
  CHECK(c.is_vacuous());
  c = zcbf_constraint(h, alpha, sys, Point2(1, 0));
  CHECK(c.a.isApprox(Vector(Point2(-2, 0))));
  CHECK(c.b == doctest::Approx(0.0));
  c = zcbf_constraint(h, alpha, sys, Point2(0.5, 0));
  CHECK(c.a.isApprox(Vector(Point2(-1, 0))));
  CHECK(c.b == doctest::Approx(-0.75));
}

TEST_CASE("pointwise extent rows") {
  const auto sys = ControlAffineSystem::single_integrator(2, 1.0);
  const auto E = ExtentFunction::ball(1.0, 2);
  const auto h = SafeFunction::halfspace(Point2(-1, 0), 0.0);
  const auto id = ClassKFunction::linear(1.0);
  auto c = eccbf_pointwise(E, h, id, id, sys, Point2(-3, 0), Point2(-2, 0));
  CHECK(c.a.isApprox(Vector(Point2(-2, 0))));
  CHECK(c.b == doctest::Approx(-2.0));
  c = eccbf_pointwise(E, h, id, id, sys, Point2(-3, 0), Point2(-3, 1));
  CHECK(c.a.isApprox(Vector(Point2(0, -2))));
  CHECK(c.b == doctest::Approx(-3.0));
  c = eccbf_pointwise(E, h, id, id, sys, Point2(-30, 0), Point2(-30, 0.5));
  CHECK(c.b < -25.0);
}

TEST_CASE("constant estimates for the half-plane example") {
  const auto sys = ControlAffineSystem::single_integrator(2, 1.0);
  const auto E = ExtentFunction::ball(1.0, 2);
  const auto h = SafeFunction::halfspace(Point2(-1, 0), 0.0);
  EstimationOptions o;
  o.margin = 1.0;
  const auto c = estimate_constants(E, h, sys, {Point2(-4, -2.5), Point2(0, 2.5)}, o);
  CHECK(c.A == doctest::Approx(1.0));
  CHECK(c.B == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(c.provenance == ConstantsProvenance::GridEstimated);

  const auto flat = SafeFunction::halfspace(Point2(0, 0), 1.0);
  CHECK(estimate_constants(E, flat, sys, {Point2(-1, -1), Point2(1, 1)}, o).A == 0.0);

  const auto wide = ExtentFunction::ball(0.3, 2);
  const auto fast = ControlAffineSystem::single_integrator(2, 1.7);
  o.resolution = 50;
  const double B = estimate_constants(wide, h, fast, {Point2(-1, -1), Point2(1, 1)}, o).B;
  CHECK(std::abs(B - 2.0 * 0.3 * 1.7) <= 0.02 * 2.0 * 0.3 * 1.7);

  o.margin = 1.1;
  const auto margined = estimate_constants(E, h, sys, {Point2(-4, -2.5), Point2(0, 2.5)}, o);
  CHECK(margined.A == doctest::Approx(1.1));
  CHECK(margined.B == doctest::Approx(2.2).epsilon(1e-9));
  o.resolution = 1;
  CHECK_THROWS_AS(estimate_constants(E, h, sys, {Point2(-1, -1), Point2(1, 1)}, o), ContractViolation);
}

TEST_CASE("sampled rows agree with the direct inequality") {
  const auto sys = ControlAffineSystem::unicycle(1.0);
  const auto E = ExtentFunction::superellipse4(1.5, 2.0, 0.2, 3, 2);
  const auto h = SafeFunction::ball(Point2::Zero(), 1.0);
  const auto consts = LipschitzConstants::user(2.0, 1.3);
  const double gamma = 0.7;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-0.5, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = Eigen::Vector3d(pos(rng), pos(rng), 6.0 * pos(rng));
    const auto net = sample_boundary(E, x, 24);
    const auto rows = sampled_constraints(E, h, net, consts, gamma, sys, x);
    REQUIRE(rows.size() == net.samples.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Vector y = net.samples[i];
      const Vector dEdx = oracle::fd_gradient([&](const Vector& s) { return E.value(s, y); }, x, 1e-6);
      for (int j = 0; j < 5; ++j) {
        const Vector u = Point2(pos(rng), pos(rng));
        const double direct = dEdx.dot(sys.drift(x) + sys.actuation(x) * u) + gamma * h.value(y) -
                              (consts.B + gamma * consts.A) * net.tau;
        const Vector dExact = E.gradient_x(x, y);
        const double exact = dExact.dot(sys.drift(x) + sys.actuation(x) * u) + gamma * h.value(y) -
                             (consts.B + gamma * consts.A) * net.tau;
        CHECK(std::abs((rows[i].a.dot(u) - rows[i].b) - exact) <= 1e-12);
        CHECK(std::abs(exact - direct) <= 1e-6);
      }
    }
  }
}

TEST_CASE("two-sample half-plane rows") {
  Example1Setup s;
  s.samples = 2;
  s.gamma = 0.5;
  const auto net = example1_net(s);
  const double x1 = -9.0;
  const auto moved = transform_net(net, Point2(x1, 0), 0.0);
  const auto rows = sampled_constraints(ExtentFunction::ball(1.0, 2), SafeFunction::halfspace(Point2(-1, 0), 0.0),
                                        moved, LipschitzConstants::user(1, 2), s.gamma,
                                        ControlAffineSystem::single_integrator(2, 1.0), Point2(x1, 0));
  const double rhs = (s.B + s.gamma * s.A) * net.tau + s.gamma * x1;
  for (double sign : {1.0, -1.0}) {
    const auto r = row_for(rows, Point2(0, 2.0 * sign));
    CHECK(r.b == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("four-sample half-plane rows") {
  // Samples at x + (s1, s2) / sqrt2: dE/dx = 2 (x - y) = -sqrt2 (s1, s2) and
  // h(y) = -(x1 + s1 / sqrt2).
  Example1Setup s;
  s.samples = 4;
  s.gamma = 0.25;
  const auto net = example1_net(s);
  const double x1 = -5.5;
  const auto rows = sampled_constraints(ExtentFunction::ball(1.0, 2), SafeFunction::halfspace(Point2(-1, 0), 0.0),
                                        transform_net(net, Point2(x1, 0), 0.0), LipschitzConstants::user(1, 2),
                                        s.gamma, ControlAffineSystem::single_integrator(2, 1.0), Point2(x1, 0));
  REQUIRE(rows.size() == 4);
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0}) {
      const auto r = row_for(rows, Point2(-kSqrt2 * s1, -kSqrt2 * s2));
      const double expected = (s.B + s.gamma * s.A) * net.tau + s.gamma * (x1 + s1 / kSqrt2);
      CHECK(r.b == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("feasibility threshold for the four-sample net") {
  for (double gamma : {0.25, 0.5, 1.0}) {
    Example1Setup s;
    s.gamma = gamma;
    const double tau = example1_net(s).tau;
    const double boundary = -(s.B / gamma + s.A) * tau;
    qp::QpOptions o;
    o.tol = 1e-12;
    for (int i = 0; i < 20; ++i) {
      const double offset = -1.0 + 2.0 * (i + 0.5) / 20.0;  // never exactly on the boundary
      const double x1 = boundary + offset * 0.5;
      const bool feasible = example1_solve(s, x1, Vector::Zero(2), o).status == StepStatus::Ok;
      CHECK(feasible == (x1 <= boundary + 1e-9));
    }
  }
}

TEST_CASE("input at the four-sample boundary") {
  // At x1 = -(B / gamma + A) tau the rows reduce to u1 +- u2 <= -gamma / 2 and
  // u1 +- u2 >= -gamma / 2, so the only feasible input is (-gamma / 2, 0).
  for (double gamma : {0.25, 0.5, 1.0}) {
    Example1Setup s;
    s.gamma = gamma;
    const double x1 = example1_closed_form(s, example1_net(s).tau);
    qp::QpOptions o;
    o.tol = 1e-12;
    const auto out = example1_solve(s, x1 - 1e-9, Point2(1, 0), o);
    REQUIRE(out.status == StepStatus::Ok);
    CHECK((out.u - Vector(Point2(-gamma / 2.0, 0.0))).norm() <= 1e-5);
  }
}

TEST_CASE("filter passes feasible nominal inputs through") {
  const auto out = filter_input({}, Point2(0.3, -0.2), 1.0);
  CHECK(out.u == Vector(Point2(0.3, -0.2)));
  CHECK_FALSE(out.active);
  const auto clipped = filter_input({}, Point2(3, 4), 1.0);
  CHECK(clipped.u.isApprox(Vector(Point2(0.6, 0.8))));
  CHECK(clipped.active);
}

TEST_CASE("filter matches the grid oracle on random instances") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 25; ++i) {
    auto p = oracle::random_qp(rng, 5);
    const auto out = filter_input(p.rows, p.target, p.ball_radius);
    const auto grid = qp::oracle_solve(p, 2000);
    REQUIRE(out.status == StepStatus::Ok);
    CHECK((out.u - grid.u).norm() <= 1e-4);
  }
}

TEST_CASE("infeasible row sets are reported, not patched") {
  const std::vector<LinearInputConstraint> rows = {{Point2(1, 0), 2.0}};
  const auto out = filter_input(rows, Point2(0, 0), 1.0);
  CHECK(out.status == StepStatus::Infeasible);
  CHECK(out.failed_constraints.size() == 1);
}

TEST_CASE("sampled filter refuses a loose QP tolerance") {
  const auto sys = ControlAffineSystem::single_integrator(2, 1.0);
  SampledFilterConfig cfg;
  cfg.samples = 8;
  cfg.qp.tol = 1.0;
  CHECK_THROWS_AS(SampledFilter(sys, ExtentFunction::ball(1.0, 2), SafeFunction::halfspace(Point2(-1, 0), 0.0),
                                LipschitzConstants::user(1e-3, 1e-3), cfg),
                  ConfigError);
}

TEST_CASE("sampled filter keeps a dense probe safe near the wall") {
  const auto sys = ControlAffineSystem::single_integrator(2, 1.0);
  const auto E = ExtentFunction::ball(1.0, 2);
  const auto h = SafeFunction::halfspace(Point2(-1, 0), 0.0);
  SampledFilterConfig cfg;
  cfg.samples = 4;
  SampledFilter f(sys, E, h, LipschitzConstants::user(1, 2), cfg);
  std::vector<double> angles;
  for (int i = 0; i < 40; ++i) angles.push_back(0.05 * std::numbers::pi * i);
  Vector x = Point2(-8.0, 0.0);
  double worst = INFINITY;
  for (int i = 0; i < 1500; ++i) {
    const auto out = f.apply(x, Point2(1, 0));
    REQUIRE(out.status == StepStatus::Ok);
    x = step(sys, x, out.u, 0.01);
    const auto probe = trace_boundary(E, x, angles);
    worst = std::min(worst, min_safe_value(h, probe));
  }
  CHECK(worst >= -1e-6);
}
