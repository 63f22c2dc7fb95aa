#ifndef ECCBF_GEOMETRY_HPP
#define ECCBF_GEOMETRY_HPP

#include "eccbf/common.hpp"
#include "eccbf/kernels.hpp"
#include "eccbf/poly.hpp"

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace eccbf {

// ---------------------------------------------------------------------------
// Safe functions h(y); the safe set is {y : h(y) >= 0}.
// ---------------------------------------------------------------------------

struct HalfspaceSafe {
  Vector normal;  // h(y) = normal . y + offset
  double offset;
};

struct BallSafe {
  Vector center;  // h(y) = radius^2 - |y - center|^2
  double radius;
};

struct PolynomialSafe {
  MultiPoly poly;
};

struct CustomSafe {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;  // may be empty
};

class SafeFunction {
 public:
  using Kind = std::variant<HalfspaceSafe, BallSafe, PolynomialSafe, CustomSafe>;

  static SafeFunction halfspace(Vector normal, double offset);
  static SafeFunction ball(Vector center, double radius);
  static SafeFunction polynomial(MultiPoly poly);
  /// h(y) = 1 - sum_i ((y_i - c_i) / s_i)^p with p even.
  static SafeFunction superellipse(const Vector& center, const Vector& semi_axes, int exponent);
  static SafeFunction custom(std::size_t dimension, std::function<double(const Vector&)> value,
                             std::function<Vector(const Vector&)> gradient = {});

  std::size_t dimension() const { return dimension_; }
  const Kind& kind() const { return kind_; }

  double value(const Vector& y) const;
  Vector gradient(const Vector& y) const;
  double value(const Point2& y) const;

  /// Polynomial form for the SOS path; empty for custom kinds.
  std::optional<MultiPoly> as_polynomial() const;

 private:
  SafeFunction(Kind kind, std::size_t dimension) : kind_(std::move(kind)), dimension_(dimension) {}
  void check_point(const Vector& y) const;

  Kind kind_;
  std::size_t dimension_;
};

// ---------------------------------------------------------------------------
// Extent functions E(x, y); the extent is {y : E(x, y) <= 0}.
//
// Built-in kinds read the extent center from the first two state coordinates
// and, when a heading index is set, the orientation phi from that coordinate.
// Body-frame offsets are w = R(-phi) (center - y).
//
// Every built-in kind has E(x, center) < 0 and a nonvanishing y-gradient on
// the boundary, and is smooth and compact, so near-boundary points are
// uniformly close to the boundary. Custom kinds carry that obligation.
// ---------------------------------------------------------------------------

struct BallExtent {
  double radius;  // E = |center - y|^2 - r^2
};

struct EllipseExtent {
  Eigen::Matrix2d shape;  // E = w^T P w - 1
  std::optional<std::size_t> heading_index;
};

struct Superellipse4Extent {
  double a;     // E = a^4 w1^4 + b^4 w2^4 - size^4
  double b;
  double size;
  std::optional<std::size_t> heading_index;
};

struct CustomExtent {
  std::function<double(const Vector& x, const Vector& y)> value;
  std::function<Vector(const Vector& x, const Vector& y)> gradient_x;  // may be empty
  std::function<Vector(const Vector& x, const Vector& y)> gradient_y;  // may be empty
  std::function<Vector(const Vector& x)> center;                       // point with E < 0
  double radius_hint = 1.0;
};

class ExtentFunction {
 public:
  using Kind = std::variant<BallExtent, EllipseExtent, Superellipse4Extent, CustomExtent>;

  static ExtentFunction ball(double radius, std::size_t state_dimension);
  static ExtentFunction ellipse(const Eigen::Matrix2d& shape, std::size_t state_dimension,
                                std::optional<std::size_t> heading_index);
  static ExtentFunction superellipse4(double a, double b, double size, std::size_t state_dimension,
                                      std::optional<std::size_t> heading_index);
  static ExtentFunction custom(CustomExtent extent, std::size_t state_dimension,
                               std::size_t point_dimension);

  std::size_t state_dimension() const { return state_dimension_; }
  std::size_t point_dimension() const { return point_dimension_; }
  const Kind& kind() const { return kind_; }

  double value(const Vector& x, const Vector& y) const;
  Vector gradient_x(const Vector& x, const Vector& y) const;
  Vector gradient_y(const Vector& x, const Vector& y) const;

  /// Point inside the extent used as the origin of boundary rays.
  Vector center(const Vector& x) const;
  /// Orientation used to rotate sample angles with the body (0 if none).
  double heading(const Vector& x) const;
  /// Upper bound on the distance from center to boundary.
  double radius_hint(const Vector& x) const;
  /// True when E(x, .) is a rigid motion (rotation by heading, translation to
  /// center) of E(x0, .) for the reference state x0 with zero center/heading.
  bool is_rigid() const;

  /// E(x, .) as a polynomial in y; empty for custom kinds.
  std::optional<MultiPoly> polynomial_in_y(const Vector& x) const;
  /// dE/dx_i (x, .) as polynomials in y, one per state coordinate.
  std::optional<std::vector<MultiPoly>> gradient_x_polynomials(const Vector& x) const;

 private:
  ExtentFunction(Kind kind, std::size_t state_dimension, std::size_t point_dimension)
      : kind_(std::move(kind)), state_dimension_(state_dimension), point_dimension_(point_dimension) {}
  void check_args(const Vector& x, const Vector& y) const;

  Kind kind_;
  std::size_t state_dimension_;
  std::size_t point_dimension_;
};

// ---------------------------------------------------------------------------
// Boundary nets
// ---------------------------------------------------------------------------

enum class BoundarySpacing { UniformAngle, ArcLength };

struct BoundaryNetOptions {
  BoundarySpacing spacing = BoundarySpacing::UniformAngle;
  /// Probe points per sample used to measure the covering radius.
  std::size_t probe_factor = 100;
  /// tau = 2 * margin * measured covering radius.
  double tau_margin = 1.0;
  kernels::Exec exec = kernels::Exec::Parallel;
};

struct BoundaryNet {
  std::vector<Point2> samples;  // ordered by parameter angle
  std::vector<double> angles;   // ray angles (world frame) of the samples
  double tau = 0.0;
  double covering_radius = 0.0;
};

/// Solves E(x, center + r*dir) = 0 for r > 0 along each ray angle.
std::vector<Point2> trace_boundary(const ExtentFunction& extent, const Vector& x,
                                   std::span<const double> angles,
                                   kernels::Exec exec = kernels::Exec::Parallel);

/// Largest distance from a probe point to its nearest sample, and the probe
/// index attaining it.
kernels::IndexedValue covering_radius(std::span<const Point2> samples, std::span<const Point2> probes,
                                      kernels::Exec exec = kernels::Exec::Parallel);

/// Samples n points on the extent boundary and certifies the covering radius
/// by dense probing (probe_factor * n points) with local refinement.
BoundaryNet sample_boundary(const ExtentFunction& extent, const Vector& x, std::size_t n,
                            const BoundaryNetOptions& options = {});

/// Applies y -> center + R(heading) y to every sample of a net built at the
/// reference pose. Distances, and so tau, are unchanged.
BoundaryNet transform_net(const BoundaryNet& reference, const Point2& center, double heading);

/// The state with zero center and zero heading (other coordinates copied).
Vector reference_pose(const ExtentFunction& extent, const Vector& x);

}  // namespace eccbf

#endif  // ECCBF_GEOMETRY_HPP
