#include "eccbf/sos.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace eccbf;

namespace {

// z(y) for a monomial list, evaluated with std::pow.
Vector monomial_vector(const std::vector<Exponents>& basis, const Point2& y) {
  Vector z(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i)
    z[static_cast<Eigen::Index>(i)] = std::pow(y.x(), basis[i][0]) * std::pow(y.y(), basis[i][1]);
  return z;
}

// dE/dx (f + g u) + a1 E + a2 h evaluated pointwise from the extent itself.
double barrier_value(const ExtentFunction& E, const SafeFunction& h, double a1, double a2,
                     const ControlAffineSystem& sys, const Vector& x, const Point2& y, const Vector& u) {
  return E.gradient_x(x, y).dot(sys.drift(x) + sys.actuation(x) * u) + a1 * E.value(x, y) + a2 * h.value(y);
}

struct Disk {
  ControlAffineSystem sys = ControlAffineSystem::unicycle(1.0);
  ExtentFunction E = ExtentFunction::superellipse4(1.5, 2.0, 0.2, 3, 2);
  SafeFunction h = SafeFunction::ball(Point2::Zero(), 1.0);
  ClassKFunction a1 = ClassKFunction::linear(10.0);
  ClassKFunction a2 = ClassKFunction::linear(1.0);
};

}  // namespace

TEST_CASE("constraint polynomial for a ball in a half-plane") {
  const auto sys = ControlAffineSystem::single_integrator(2, 1.0);
  const auto E = ExtentFunction::ball(1.0, 2);
  const auto h = SafeFunction::halfspace(Point2(-1, 0), 0.0);
  const auto id = ClassKFunction::linear(1.0);
  const Vector x = Point2(-3, 0);
  const auto p = sos::build_constraint_poly(E, h, id, id, sys, x);
  CHECK(p.degree() == 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r(-4.0, 4.0);
  for (int i = 0; i < 50; ++i) {
    const Point2 y(r(rng), r(rng));
    const Vector u = Point2(r(rng), r(rng));
    const Point2 d = x - y;
    const double by_hand = 2.0 * d.dot(u) + (d.squaredNorm() - 1.0) - y.x();
    const double yy[] = {y.x(), y.y()};
    CHECK(p.at(u).evaluate(yy) == doctest::Approx(by_hand).epsilon(1e-12));
  }
  // zero drift: the input-free part is alpha1(E) + alpha2(h)
  const auto expected = *E.polynomial_in_y(x) + *h.as_polynomial();
  CHECK((p.constant - expected).max_abs_coefficient() == 0.0);
}

TEST_CASE("degree bookkeeping for the superellipse in a disk") {
  Disk d;
  const auto p = sos::build_constraint_poly(d.E, d.h, d.a1, d.a2, d.sys, Eigen::Vector3d(0.1, 0.2, 0.3));
  CHECK(p.degree() == 4);
  CHECK(sos::default_multiplier_degree(4, 2) == 2);
  CHECK(sos::default_multiplier_degree(5, 2) == 2);
  CHECK(sos::default_multiplier_degree(2, 2) == 0);
}

TEST_CASE("trivial programs") {
  const MultiPoly y1 = MultiPoly::variable(2, 0);
  const MultiPoly one = MultiPoly::constant(2, 1.0);
  sos::AffinePoly p{y1 * y1 + one, {MultiPoly(2)}};
  auto r = sos::solve_sos_program(sos::assemble_sos_program(p, one, 0, Vector::Zero(1), 1.0));
  CHECK(r.status == StepStatus::Ok);
  CHECK(r.certificate.valid);
  CHECK(std::abs(r.delta) <= 1e-6);

  sos::AffinePoly negative{MultiPoly::constant(2, -1.0), {MultiPoly(2)}};
  r = sos::solve_sos_program(sos::assemble_sos_program(negative, one, 0, Vector::Zero(1), 1.0));
  CHECK(r.status == StepStatus::Infeasible);

  CHECK_THROWS_AS(sos::assemble_sos_program(p, one, 1, Vector::Zero(1), 1.0), ConfigError);
  CHECK_THROWS_AS(sos::assemble_sos_program(p, one, -2, Vector::Zero(1), 1.0), ConfigError);
}

TEST_CASE("non-polynomial data is unsupported") {
  Disk d;
  const auto custom_h = SafeFunction::custom(2, [](const Vector& y) { return 1.0 - y.squaredNorm(); });
  CHECK_THROWS_AS(sos::build_constraint_poly(d.E, custom_h, d.a1, d.a2, d.sys, Vector::Zero(3)),
                  UnsupportedOperation);
  CHECK_THROWS_AS(sos::build_constraint_poly(d.E, d.h, ClassKFunction::cubic(1.0), d.a2, d.sys, Vector::Zero(3)),
                  UnsupportedOperation);
}

TEST_CASE("center of the disk with zero nominal input") {
  Disk d;
  const Vector x = Vector::Zero(3);
  const auto r = sos::sos_filter_input(d.E, d.h, d.a1, d.a2, d.sys, x, Vector::Zero(2));
  REQUIRE(r.status == StepStatus::Ok);
  CHECK(r.u.norm() <= 1e-5);
  CHECK(std::abs(r.delta) <= 1e-5);
  // p_u - s h must be nonnegative everywhere; check on a grid
  const MultiPoly certified = sos::build_constraint_poly(d.E, d.h, d.a1, d.a2, d.sys, x).at(r.u) -
                              r.certificate.multiplier * *d.h.as_polynomial();
  double worst = INFINITY;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) {
      const double y[] = {-2.0 + 0.02 * i, -2.0 + 0.02 * j};
      worst = std::min(worst, certified.evaluate(y));
    }
  CHECK(worst >= -1e-6);
}

TEST_CASE("deep interior keeps an inward nominal input") {
  Disk d;
  const Vector x = Eigen::Vector3d(0.2, 0.0, std::numbers::pi);  // facing the center
  const Vector k = Point2(0.4, 0.1);
  const auto r = sos::sos_filter_input(d.E, d.h, d.a1, d.a2, d.sys, x, k);
  REQUIRE(r.status == StepStatus::Ok);
  CHECK((r.u - k).norm() <= 1e-4);
  double worst = INFINITY;
  for (const auto& y : sample_boundary(d.E, x, 400).samples)
    worst = std::min(worst, barrier_value(d.E, d.h, 10.0, 1.0, d.sys, x, y, k));
  CHECK(worst >= 0.0);
}

TEST_CASE("near the wall an outward nominal input is corrected") {
  Disk d;
  const Vector x = Eigen::Vector3d(0.85, 0.05, 0.1);  // facing the wall
  const Vector k = Point2(1.0, 0.0);
  const auto r = sos::sos_filter_input(d.E, d.h, d.a1, d.a2, d.sys, x, k);
  REQUIRE(r.status == StepStatus::Ok);
  CHECK(r.u[0] < 0.9);
  double worst_k = INFINITY, worst_u = INFINITY;
  for (const auto& y : sample_boundary(d.E, x, 2000).samples) {
    worst_k = std::min(worst_k, barrier_value(d.E, d.h, 10.0, 1.0, d.sys, x, y, k));
    worst_u = std::min(worst_u, barrier_value(d.E, d.h, 10.0, 1.0, d.sys, x, y, r.u));
  }
  CHECK(worst_k < 0.0);
  CHECK(worst_u >= -1e-6);
}

TEST_CASE("certificates are sound") {
  Disk d;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(-0.55, 0.55), ang(-3.1, 3.1), unit(-1.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const Vector x = Eigen::Vector3d(pos(rng), pos(rng), ang(rng));
    const Vector k = Point2(unit(rng), unit(rng));
    const auto poly = sos::build_constraint_poly(d.E, d.h, d.a1, d.a2, d.sys, x);
    const auto program = sos::assemble_sos_program(poly, *d.h.as_polynomial(), 2, k, 1.0);
    const auto r = sos::solve_sos_program(program);
    REQUIRE(r.status == StepStatus::Ok);
    ++solved;
    CHECK(r.certificate.coefficient_error <= 1e-6);
    CHECK(r.certificate.q_min_eigenvalue >= -1e-7);
    CHECK(r.certificate.s_min_eigenvalue >= -1e-7);

    const Matrix Q = program.gram_from(r.sdp.v), S = program.multiplier_gram_from(r.sdp.v);
    const Vector u = r.sdp.v.head(2);
    std::uniform_real_distribution<double> wide(-1.5, 1.5);
    for (int i = 0; i < 100; ++i) {
      const Point2 y(wide(rng), wide(rng));
      const Vector z = monomial_vector(program.main.monomials, y);
      const Vector zs = monomial_vector(program.multiplier.monomials, y);
      const double s = zs.dot(S * zs);
      const double matched = barrier_value(d.E, d.h, 10.0, 1.0, d.sys, x, y, u) - s * d.h.value(y);
      const double gram = z.dot(Q * z);
      CHECK(std::abs(matched - gram) <= 1e-6 * std::max(1.0, std::abs(gram)));
    }
    double worst = INFINITY, worst_s = INFINITY;
    for (int i = 0; i < 10000; ++i) {
      const Point2 y(wide(rng), wide(rng));
      const Vector zs = monomial_vector(program.multiplier.monomials, y);
      const double s = zs.dot(S * zs);
      worst_s = std::min(worst_s, s);
      worst = std::min(worst, barrier_value(d.E, d.h, 10.0, 1.0, d.sys, x, y, u) - s * d.h.value(y));
    }
    CHECK(worst >= -1e-6);
    CHECK(worst_s >= -1e-6);

    // SOS feasibility implies the pointwise condition on the extent boundary
    double boundary = INFINITY;
    for (const auto& y : sample_boundary(d.E, x, 1000).samples)
      boundary = std::min(boundary, barrier_value(d.E, d.h, 10.0, 1.0, d.sys, x, y, u));
    CHECK(boundary >= -1e-6);
  }
  CHECK(solved == 12);
}

TEST_CASE("SOS filter reports its status") {
  Disk d;
  sos::SosFilter f(d.sys, d.E, d.h, d.a1, d.a2);
  const auto ok = f.apply(Vector::Zero(3), Point2(0.2, 0.0));
  CHECK(ok.status == StepStatus::Ok);
  CHECK_FALSE(ok.active);
  CHECK(ok.iterations > 0);
  const auto pushed = f.apply(Eigen::Vector3d(0.85, 0.05, 0.1), Point2(1.0, 0.0));
  CHECK(pushed.status == StepStatus::Ok);
  CHECK(pushed.active);
}
