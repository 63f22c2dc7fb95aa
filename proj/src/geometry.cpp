#include "eccbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace eccbf {

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

// ---------------------------------------------------------------------------
// SafeFunction
// ---------------------------------------------------------------------------

SafeFunction SafeFunction::halfspace(Vector normal, double offset) {
  require(normal.size() > 0, "halfspace normal must be nonempty");
  require(normal.allFinite() && std::isfinite(offset), "halfspace parameters must be finite");
  const auto dim = static_cast<std::size_t>(normal.size());
  return SafeFunction(HalfspaceSafe{std::move(normal), offset}, dim);
}

SafeFunction SafeFunction::ball(Vector center, double radius) {
  require(center.size() > 0, "ball center must be nonempty");
  require(radius > 0.0 && std::isfinite(radius), "ball radius must be positive");
  const auto dim = static_cast<std::size_t>(center.size());
  return SafeFunction(BallSafe{std::move(center), radius}, dim);
}

SafeFunction SafeFunction::polynomial(MultiPoly poly) {
  const auto dim = poly.num_vars();
  return SafeFunction(PolynomialSafe{std::move(poly)}, dim);
}

SafeFunction SafeFunction::superellipse(const Vector& center, const Vector& semi_axes, int exponent) {
  require(center.size() == semi_axes.size() && center.size() > 0, "superellipse dimension mismatch");
  require(exponent >= 2 && exponent % 2 == 0, "superellipse exponent must be even and >= 2");
  require((semi_axes.array() > 0.0).all(), "superellipse semi-axes must be positive");
  const auto n = static_cast<std::size_t>(center.size());
  MultiPoly h = MultiPoly::constant(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = semi_axes[static_cast<Eigen::Index>(i)];
    const MultiPoly t = (MultiPoly::variable(n, i) - MultiPoly::constant(n, center[static_cast<Eigen::Index>(i)])) * (1.0 / s);
    h -= t.pow(exponent);
  }
  return polynomial(std::move(h));
}

SafeFunction SafeFunction::custom(std::size_t dimension, std::function<double(const Vector&)> value,
                                  std::function<Vector(const Vector&)> gradient) {
  require(dimension > 0, "custom safe function needs a positive dimension");
  require(static_cast<bool>(value), "custom safe function needs a value callback");
  return SafeFunction(CustomSafe{std::move(value), std::move(gradient)}, dimension);
}

void SafeFunction::check_point(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != dimension_)
    throw ContractViolation("safe function expects a point of dimension " + std::to_string(dimension_) +
                            ", got " + std::to_string(y.size()));
}

double SafeFunction::value(const Vector& y) const {
  check_point(y);
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HalfspaceSafe>) {
          return k.normal.dot(y) + k.offset;
        } else if constexpr (std::is_same_v<K, BallSafe>) {
          return k.radius * k.radius - (y - k.center).squaredNorm();
        } else if constexpr (std::is_same_v<K, PolynomialSafe>) {
          return k.poly.evaluate(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
        } else {
          return k.value(y);
        }
      },
      kind_);
}

double SafeFunction::value(const Point2& y) const {
  if (dimension_ != 2) throw ContractViolation("safe function is not planar");
  if (const auto* p = std::get_if<PolynomialSafe>(&kind_))
    return p->poly.evaluate(std::span<const double>(y.data(), 2));
  return value(Vector(y));
}

Vector SafeFunction::gradient(const Vector& y) const {
  check_point(y);
  return std::visit(
      [&](const auto& k) -> Vector {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HalfspaceSafe>) {
          return k.normal;
        } else if constexpr (std::is_same_v<K, BallSafe>) {
          return -2.0 * (y - k.center);
        } else if constexpr (std::is_same_v<K, PolynomialSafe>) {
          Vector g(y.size());
          const std::span<const double> pt(y.data(), static_cast<std::size_t>(y.size()));
          for (Eigen::Index i = 0; i < y.size(); ++i)
            g[i] = k.poly.derivative(static_cast<std::size_t>(i)).evaluate(pt);
          return g;
        } else {
          if (!k.gradient) throw UnsupportedOperation("custom safe function has no gradient callback");
          return k.gradient(y);
        }
      },
      kind_);
}

std::optional<MultiPoly> SafeFunction::as_polynomial() const {
  const std::size_t n = dimension_;
  return std::visit(
      [&](const auto& k) -> std::optional<MultiPoly> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HalfspaceSafe>) {
          MultiPoly p = MultiPoly::constant(n, k.offset);
          for (std::size_t i = 0; i < n; ++i)
            p += MultiPoly::variable(n, i) * k.normal[static_cast<Eigen::Index>(i)];
          return p;
        } else if constexpr (std::is_same_v<K, BallSafe>) {
          MultiPoly p = MultiPoly::constant(n, k.radius * k.radius);
          for (std::size_t i = 0; i < n; ++i) {
            const MultiPoly d = MultiPoly::variable(n, i) - MultiPoly::constant(n, k.center[static_cast<Eigen::Index>(i)]);
            p -= d * d;
          }
          return p;
        } else if constexpr (std::is_same_v<K, PolynomialSafe>) {
          return k.poly;
        } else {
          return std::nullopt;
        }
      },
      kind_);
}

// ---------------------------------------------------------------------------
// ExtentFunction
// ---------------------------------------------------------------------------

namespace {

struct BodyFrame {
  double c, s;    // cos/sin of heading
  double w1, w2;  // body-frame offsets of (center - y)
};

BodyFrame body_frame(double phi, double d1, double d2) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {c, s, c * d1 + s * d2, -s * d1 + c * d2};
}

// Body-frame gradient dE/dw for the rotating kinds.
Eigen::Vector2d body_gradient(const ExtentFunction::Kind& kind, double w1, double w2) {
  if (const auto* e = std::get_if<EllipseExtent>(&kind)) return 2.0 * e->shape * Eigen::Vector2d(w1, w2);
  const auto& q = std::get<Superellipse4Extent>(kind);
  const double a4 = std::pow(q.a, 4), b4 = std::pow(q.b, 4);
  return {4.0 * a4 * w1 * w1 * w1, 4.0 * b4 * w2 * w2 * w2};
}

void check_heading(std::optional<std::size_t> heading_index, std::size_t state_dimension) {
  if (heading_index)
    require(*heading_index >= 2 && *heading_index < state_dimension,
            "heading index must address a non-position state coordinate");
}

}  // namespace

ExtentFunction ExtentFunction::ball(double radius, std::size_t state_dimension) {
  require(radius > 0.0 && std::isfinite(radius), "ball extent radius must be positive");
  require(state_dimension >= 2, "ball extent needs a planar position in the state");
  return ExtentFunction(BallExtent{radius}, state_dimension, 2);
}

ExtentFunction ExtentFunction::ellipse(const Eigen::Matrix2d& shape, std::size_t state_dimension,
                                       std::optional<std::size_t> heading_index) {
  require(state_dimension >= 2, "ellipse extent needs a planar position in the state");
  require(std::abs(shape(0, 1) - shape(1, 0)) <= 1e-12 * shape.norm(), "ellipse shape must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(shape);
  require(eig.eigenvalues().minCoeff() > 0.0, "ellipse shape must be positive definite");
  check_heading(heading_index, state_dimension);
  return ExtentFunction(EllipseExtent{shape, heading_index}, state_dimension, 2);
}

ExtentFunction ExtentFunction::superellipse4(double a, double b, double size, std::size_t state_dimension,
                                             std::optional<std::size_t> heading_index) {
  require(a > 0.0 && b > 0.0 && size > 0.0, "superellipse weights and size must be positive");
  require(state_dimension >= 2, "superellipse extent needs a planar position in the state");
  check_heading(heading_index, state_dimension);
  return ExtentFunction(Superellipse4Extent{a, b, size, heading_index}, state_dimension, 2);
}

ExtentFunction ExtentFunction::custom(CustomExtent extent, std::size_t state_dimension,
                                      std::size_t point_dimension) {
  require(static_cast<bool>(extent.value), "custom extent needs a value callback");
  require(static_cast<bool>(extent.center), "custom extent needs a center callback");
  require(state_dimension > 0 && point_dimension > 0, "custom extent dimensions must be positive");
  return ExtentFunction(std::move(extent), state_dimension, point_dimension);
}

void ExtentFunction::check_args(const Vector& x, const Vector& y) const {
  if (static_cast<std::size_t>(x.size()) != state_dimension_ ||
      static_cast<std::size_t>(y.size()) != point_dimension_)
    throw ContractViolation("extent function expects x of dimension " + std::to_string(state_dimension_) +
                            " and y of dimension " + std::to_string(point_dimension_) + ", got " +
                            std::to_string(x.size()) + " and " + std::to_string(y.size()));
}

double ExtentFunction::heading(const Vector& x) const {
  const std::optional<std::size_t>* index = nullptr;
  if (const auto* e = std::get_if<EllipseExtent>(&kind_)) index = &e->heading_index;
  if (const auto* q = std::get_if<Superellipse4Extent>(&kind_)) index = &q->heading_index;
  if (index == nullptr || !index->has_value()) return 0.0;
  return x[static_cast<Eigen::Index>(**index)];
}

Vector ExtentFunction::center(const Vector& x) const {
  require(static_cast<std::size_t>(x.size()) == state_dimension_, "extent center: state dimension mismatch");
  if (const auto* c = std::get_if<CustomExtent>(&kind_)) return c->center(x);
  return x.head(2);
}

double ExtentFunction::radius_hint(const Vector& x) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, BallExtent>) {
          return k.radius;
        } else if constexpr (std::is_same_v<K, EllipseExtent>) {
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(k.shape);
          return 1.0 / std::sqrt(eig.eigenvalues().minCoeff());
        } else if constexpr (std::is_same_v<K, Superellipse4Extent>) {
          return k.size / std::min(k.a, k.b);
        } else {
          (void)x;
          return k.radius_hint;
        }
      },
      kind_);
}

bool ExtentFunction::is_rigid() const { return !std::holds_alternative<CustomExtent>(kind_); }

double ExtentFunction::value(const Vector& x, const Vector& y) const {
  check_args(x, y);
  if (const auto* c = std::get_if<CustomExtent>(&kind_)) return c->value(x, y);
  const double d1 = x[0] - y[0];
  const double d2 = x[1] - y[1];
  if (const auto* b = std::get_if<BallExtent>(&kind_)) return d1 * d1 + d2 * d2 - b->radius * b->radius;
  const BodyFrame f = body_frame(heading(x), d1, d2);
  if (const auto* e = std::get_if<EllipseExtent>(&kind_)) {
    const Eigen::Vector2d w(f.w1, f.w2);
    return w.dot(e->shape * w) - 1.0;
  }
  const auto& q = std::get<Superellipse4Extent>(kind_);
  return std::pow(q.a * f.w1, 4) + std::pow(q.b * f.w2, 4) - std::pow(q.size, 4);
}

Vector ExtentFunction::gradient_x(const Vector& x, const Vector& y) const {
  check_args(x, y);
  if (const auto* c = std::get_if<CustomExtent>(&kind_)) {
    if (!c->gradient_x) throw UnsupportedOperation("custom extent has no x-gradient callback");
    return c->gradient_x(x, y);
  }
  Vector g = Vector::Zero(x.size());
  const double d1 = x[0] - y[0];
  const double d2 = x[1] - y[1];
  if (std::holds_alternative<BallExtent>(kind_)) {
    g[0] = 2.0 * d1;
    g[1] = 2.0 * d2;
    return g;
  }
  const BodyFrame f = body_frame(heading(x), d1, d2);
  const Eigen::Vector2d gw = body_gradient(kind_, f.w1, f.w2);
  // d(center) part: R(-phi)^T gw
  g[0] = f.c * gw[0] - f.s * gw[1];
  g[1] = f.s * gw[0] + f.c * gw[1];
  const std::optional<std::size_t> index = std::visit(
      [](const auto& k) -> std::optional<std::size_t> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EllipseExtent> || std::is_same_v<K, Superellipse4Extent>)
          return k.heading_index;
        else
          return std::nullopt;
      },
      kind_);
  if (index) g[static_cast<Eigen::Index>(*index)] = gw[0] * f.w2 - gw[1] * f.w1;
  return g;
}

Vector ExtentFunction::gradient_y(const Vector& x, const Vector& y) const {
  check_args(x, y);
  if (const auto* c = std::get_if<CustomExtent>(&kind_)) {
    if (!c->gradient_y) throw UnsupportedOperation("custom extent has no y-gradient callback");
    return c->gradient_y(x, y);
  }
  // E depends on y only through (center - y)
  return -gradient_x(x, y).head(2);
}

std::optional<MultiPoly> ExtentFunction::polynomial_in_y(const Vector& x) const {
  require(static_cast<std::size_t>(x.size()) == state_dimension_, "extent polynomial: state dimension mismatch");
  if (std::holds_alternative<CustomExtent>(kind_)) return std::nullopt;
  const MultiPoly d1 = MultiPoly::constant(2, x[0]) - MultiPoly::variable(2, 0);
  const MultiPoly d2 = MultiPoly::constant(2, x[1]) - MultiPoly::variable(2, 1);
  if (const auto* b = std::get_if<BallExtent>(&kind_))
    return d1 * d1 + d2 * d2 - MultiPoly::constant(2, b->radius * b->radius);
  const double phi = heading(x);
  const double c = std::cos(phi), s = std::sin(phi);
  const MultiPoly w1 = c * d1 + s * d2;
  const MultiPoly w2 = -s * d1 + c * d2;
  if (const auto* e = std::get_if<EllipseExtent>(&kind_)) {
    const auto& P = e->shape;
    return P(0, 0) * (w1 * w1) + (P(0, 1) + P(1, 0)) * (w1 * w2) + P(1, 1) * (w2 * w2) -
           MultiPoly::constant(2, 1.0);
  }
  const auto& q = std::get<Superellipse4Extent>(kind_);
  return std::pow(q.a, 4) * w1.pow(4) + std::pow(q.b, 4) * w2.pow(4) - MultiPoly::constant(2, std::pow(q.size, 4));
}

std::optional<std::vector<MultiPoly>> ExtentFunction::gradient_x_polynomials(const Vector& x) const {
  const auto poly = polynomial_in_y(x);
  if (!poly) return std::nullopt;
  std::vector<MultiPoly> grads(state_dimension_, MultiPoly(2));
  grads[0] = -poly->derivative(0);
  grads[1] = -poly->derivative(1);
  if (std::holds_alternative<BallExtent>(kind_)) return grads;
  std::optional<std::size_t> index;
  if (const auto* e = std::get_if<EllipseExtent>(&kind_)) index = e->heading_index;
  if (const auto* q = std::get_if<Superellipse4Extent>(&kind_)) index = q->heading_index;
  if (!index) return grads;
  const double phi = heading(x);
  const double c = std::cos(phi), s = std::sin(phi);
  const MultiPoly d1 = MultiPoly::constant(2, x[0]) - MultiPoly::variable(2, 0);
  const MultiPoly d2 = MultiPoly::constant(2, x[1]) - MultiPoly::variable(2, 1);
  const MultiPoly w1 = c * d1 + s * d2;
  const MultiPoly w2 = -s * d1 + c * d2;
  MultiPoly gw1(2), gw2(2);
  if (const auto* e = std::get_if<EllipseExtent>(&kind_)) {
    const auto& P = e->shape;
    gw1 = 2.0 * (P(0, 0) * w1 + P(0, 1) * w2);
    gw2 = 2.0 * (P(1, 0) * w1 + P(1, 1) * w2);
  } else {
    const auto& q = std::get<Superellipse4Extent>(kind_);
    gw1 = 4.0 * std::pow(q.a, 4) * w1.pow(3);
    gw2 = 4.0 * std::pow(q.b, 4) * w2.pow(3);
  }
  grads[*index] = gw1 * w2 - gw2 * w1;
  return grads;
}

Vector reference_pose(const ExtentFunction& extent, const Vector& x) {
  require(extent.is_rigid(), "reference pose is only defined for built-in extents");
  Vector r = x;
  r[0] = 0.0;
  r[1] = 0.0;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EllipseExtent> || std::is_same_v<K, Superellipse4Extent>)
          if (k.heading_index) r[static_cast<Eigen::Index>(*k.heading_index)] = 0.0;
      },
      extent.kind());
  return r;
}

// ---------------------------------------------------------------------------
// Boundary tracing and nets
// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxBracketDoublings = 60;
constexpr int kMaxRootIterations = 200;
constexpr double kRootTolerance = 1e-12;

// Radial root of r -> E(x, center + r*dir): bisection bracket with Newton
// steps accepted only when they land strictly inside the bracket.
Point2 trace_ray(const ExtentFunction& extent, const Vector& x, const Vector& center, double hint,
                 double angle, bool has_gradient) {
  const Point2 dir(std::cos(angle), std::sin(angle));
  Vector y(2);
  auto eval = [&](double r) {
    y[0] = center[0] + r * dir[0];
    y[1] = center[1] + r * dir[1];
    return extent.value(x, y);
  };
  if (!(eval(0.0) < 0.0)) throw GeometryError("extent center is not strictly inside the extent");
  double lo = 0.0;
  double hi = 1.05 * hint;
  int doublings = 0;
  while (!(eval(hi) > 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxBracketDoublings || !std::isfinite(hi))
      throw GeometryError("could not bracket the extent boundary along a ray");
  }
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxRootIterations; ++it) {
    const double f = eval(r);
    if (!std::isfinite(f)) throw GeometryError("extent evaluation is not finite along a ray");
    if (f == 0.0) return center.head<2>() + r * dir;
    if (f < 0.0) lo = r; else hi = r;
    if (hi - lo <= kRootTolerance * std::max(1.0, hi)) break;
    double next = 0.5 * (lo + hi);
    if (has_gradient) {
      const double slope = extent.gradient_y(x, y).head<2>().dot(dir);
      if (slope > 0.0) {
        const double newton = r - f / slope;
        if (newton > lo && newton < hi) next = newton;
      }
    }
    if (std::abs(next - r) <= 0.25 * kRootTolerance * std::max(1.0, r)) {
      r = next;
      break;
    }
    r = next;
  }
  return center.head<2>() + r * dir;
}

bool has_y_gradient(const ExtentFunction& extent) {
  if (const auto* c = std::get_if<CustomExtent>(&extent.kind())) return static_cast<bool>(c->gradient_y);
  return true;
}

double nearest_distance(const Point2& p, std::span<const Point2> samples) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point2& s : samples) best = std::min(best, (p - s).squaredNorm());
  return std::sqrt(best);
}

}  // namespace

std::vector<Point2> trace_boundary(const ExtentFunction& extent, const Vector& x, std::span<const double> angles,
                                   kernels::Exec exec) {
  if (extent.point_dimension() != 2) throw UnsupportedOperation("boundary tracing is planar only");
  const Vector center = extent.center(x);
  const double hint = extent.radius_hint(x);
  const bool grad = has_y_gradient(extent);
  std::vector<Point2> points(angles.size());
  std::vector<char> failed(angles.size(), 0);
  kernels::for_each_index(
      angles.size(),
      [&](std::size_t i) {
        try {
          points[i] = trace_ray(extent, x, center, hint, angles[i], grad);
        } catch (...) {
          failed[i] = 1;
        }
      },
      exec);
  for (std::size_t i = 0; i < angles.size(); ++i)
    if (failed[i]) {
      // rerun serially to surface the actual error
      trace_ray(extent, x, center, hint, angles[i], grad);
      throw GeometryError("boundary tracing failed");
    }
  return points;
}

kernels::IndexedValue covering_radius(std::span<const Point2> samples, std::span<const Point2> probes,
                                      kernels::Exec exec) {
  require(!samples.empty(), "covering radius needs at least one sample");
  return kernels::argmax(probes.size(), [&](std::size_t j) { return nearest_distance(probes[j], samples); }, exec);
}

namespace {

std::vector<double> uniform_angles(double start, std::size_t count, double offset_fraction) {
  std::vector<double> a(count);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) a[i] = start + (static_cast<double>(i) + offset_fraction) * step;
  return a;
}

std::vector<double> arc_length_angles(const ExtentFunction& extent, const Vector& x, double heading,
                                      std::size_t n, std::size_t dense, kernels::Exec exec) {
  std::vector<double> dense_angles = uniform_angles(heading, dense, 0.0);
  const std::vector<Point2> pts = trace_boundary(extent, x, dense_angles, exec);
  std::vector<double> cumulative(dense + 1, 0.0);
  for (std::size_t j = 0; j < dense; ++j)
    cumulative[j + 1] = cumulative[j] + (pts[(j + 1) % dense] - pts[j]).norm();
  const double total = cumulative[dense];
  const double step = 2.0 * std::numbers::pi / static_cast<double>(dense);
  std::vector<double> angles(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = (static_cast<double>(i) + 0.5) * total / static_cast<double>(n);
    while (j + 1 < dense && cumulative[j + 1] < target) ++j;
    const double seg = cumulative[j + 1] - cumulative[j];
    const double t = seg > 0.0 ? (target - cumulative[j]) / seg : 0.0;
    angles[i] = heading + (static_cast<double>(j) + t) * step;
  }
  return angles;
}

}  // namespace

BoundaryNet sample_boundary(const ExtentFunction& extent, const Vector& x, std::size_t n,
                            const BoundaryNetOptions& options) {
  require(n >= 2, "a boundary net needs at least two samples");
  require(options.probe_factor >= 100, "covering radius certification needs >= 100 probes per sample");
  require(options.tau_margin >= 1.0, "tau margin must be >= 1");
  const double heading = extent.heading(x);
  const std::size_t dense = options.probe_factor * n;

  BoundaryNet net;
  net.angles = options.spacing == BoundarySpacing::UniformAngle
                   ? uniform_angles(heading, n, 0.5)
                   : arc_length_angles(extent, x, heading, n, dense, options.exec);
  net.samples = trace_boundary(extent, x, net.angles, options.exec);

  const std::vector<double> probe_angles = uniform_angles(heading, dense, 0.0);
  const std::vector<Point2> probes = trace_boundary(extent, x, probe_angles, options.exec);
  std::vector<double> distance(dense);
  kernels::for_each_index(dense, [&](std::size_t j) { distance[j] = nearest_distance(probes[j], net.samples); },
                          options.exec);
  double measured = *std::max_element(distance.begin(), distance.end());

  // Golden-section refinement around every local maximum of the probe
  // distances: each gap between samples has one, and it sits between the
  // neighbours of its best probe.
  std::vector<std::size_t> peaks;
  for (std::size_t j = 0; j < dense; ++j) {
    const double before = distance[(j + dense - 1) % dense], after = distance[(j + 1) % dense];
    if (distance[j] > before && distance[j] >= after) peaks.push_back(j);
  }
  const double step = 2.0 * std::numbers::pi / static_cast<double>(dense);
  const Vector center = extent.center(x);
  const double hint = extent.radius_hint(x);
  const bool grad = has_y_gradient(extent);
  auto gap = [&](double angle) {
    return nearest_distance(trace_ray(extent, x, center, hint, angle, grad), net.samples);
  };
  constexpr double inv_phi = 0.6180339887498949;
  std::vector<double> refined(peaks.size());
  kernels::for_each_index(
      peaks.size(),
      [&](std::size_t r) {
        double a = probe_angles[peaks[r]] - step;
        double b = probe_angles[peaks[r]] + step;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = gap(c), fd = gap(d);
        for (int it = 0; it < 40; ++it) {
          if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = gap(c);
          } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = gap(d);
          }
        }
        refined[r] = std::max(fc, fd);
      },
      options.exec);
  for (double v : refined) measured = std::max(measured, v);

  // traced points are exact only to the root tolerance
  measured += 4.0 * kRootTolerance * std::max(1.0, hint);
  net.covering_radius = measured;
  net.tau = 2.0 * options.tau_margin * measured;
  return net;
}

BoundaryNet transform_net(const BoundaryNet& reference, const Point2& center, double heading) {
  const Eigen::Rotation2Dd rot(heading);
  BoundaryNet net = reference;
  for (auto& s : net.samples) s = center + rot * s;
  for (auto& a : net.angles) a += heading;
  return net;
}

}  // namespace eccbf
