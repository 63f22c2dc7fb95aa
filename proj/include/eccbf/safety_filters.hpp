#ifndef ECCBF_SAFETY_FILTERS_HPP
#define ECCBF_SAFETY_FILTERS_HPP

#include "eccbf/common.hpp"
#include "eccbf/dynamics.hpp"
#include "eccbf/geometry.hpp"
#include "eccbf/kernels.hpp"
#include "eccbf/qp.hpp"

#include <memory>
#include <string>
#include <vector>

namespace eccbf {

struct ClassKFunction {
  enum class Kind { Linear, Cubic };

  Kind kind = Kind::Linear;
  double gain = 1.0;

  static ClassKFunction linear(double gain);
  static ClassKFunction cubic(double gain);

  double operator()(double s) const { return kind == Kind::Linear ? gain * s : gain * s * s * s; }
};

enum class ConstantsProvenance { UserSupplied, GridEstimated };

struct LipschitzConstants {
  double A = 0.0;  // bound on |dh/dy|
  double B = 0.0;  // bound on |dE/dx (f + g u)| for |u| <= M
  ConstantsProvenance provenance = ConstantsProvenance::UserSupplied;
  int grid_resolution = 0;  // GridEstimated only
  double margin = 1.0;      // GridEstimated only

  static LipschitzConstants user(double A, double B);
};

/// dh/dx (f + g u) + alpha(h) >= 0 at the state's position, as a^T u >= b.
/// h is evaluated at the leading coordinates of x.
LinearInputConstraint zcbf_constraint(const SafeFunction& h, const ClassKFunction& alpha,
                                      const ControlAffineSystem& sys, const Vector& x);

/// dE/dx(x, y) (f + g u) + alpha1(E(x, y)) + alpha2(h(y)) >= 0 as a^T u >= b.
LinearInputConstraint eccbf_pointwise(const ExtentFunction& extent, const SafeFunction& h,
                                      const ClassKFunction& alpha1, const ClassKFunction& alpha2,
                                      const ControlAffineSystem& sys, const Vector& x, const Vector& y);

/// Axis-aligned box of extent positions. Headings, when the system has one,
/// are gridded over [-pi, pi); other state coordinates are held at zero.
struct EstimationDomain {
  Point2 lower;
  Point2 upper;
};

struct EstimationOptions {
  int resolution = 20;                 // grid points per axis, >= 2
  double margin = 1.1;
  std::size_t boundary_samples = 64;   // y points on each extent boundary
  kernels::Exec exec = kernels::Exec::Parallel;
};

/// Grid estimates of A = max |grad h| over the box and
/// B = max |dE/dx f| + M |dE/dx g| over states in the box and y on the
/// extent boundary; both are multiplied by the margin.
LipschitzConstants estimate_constants(const ExtentFunction& extent, const SafeFunction& h,
                                      const ControlAffineSystem& sys, const EstimationDomain& domain,
                                      const EstimationOptions& options = {});

/// One row per net sample:
/// dE/dx(x, y*) (f + g u) + gamma h(y*) >= (B + gamma A) tau.
std::vector<LinearInputConstraint> sampled_constraints(const ExtentFunction& extent, const SafeFunction& h,
                                                       const BoundaryNet& net, const LipschitzConstants& consts,
                                                       double gamma, const ControlAffineSystem& sys,
                                                       const Vector& x);

struct FilterOutput {
  Vector u;
  StepStatus status = StepStatus::Unfiltered;
  bool active = false;  // u differs from the nominal input
  std::size_t rows = 0;
  int iterations = 0;
  /// The constraint set, kept only when the solve failed (for diagnostics).
  std::vector<LinearInputConstraint> failed_constraints;
};

/// argmin |u - k|^2 subject to the constraints and |u| <= M.
FilterOutput filter_input(const std::vector<LinearInputConstraint>& constraints, const Vector& k,
                          double input_bound, const qp::QpOptions& options = {});

// ---------------------------------------------------------------------------
// Filters. Configuration is immutable after construction and apply() is
// const, so one instance may serve several simulations at once.
// ---------------------------------------------------------------------------

class SafetyFilter {
 public:
  virtual ~SafetyFilter() = default;
  virtual std::string name() const = 0;
  virtual FilterOutput apply(const Vector& x, const Vector& k) const = 0;
};

/// Passes the nominal input through.
class NoFilter final : public SafetyFilter {
 public:
  std::string name() const override { return "none"; }
  FilterOutput apply(const Vector& x, const Vector& k) const override;
};

/// Point-mass ZCBF on the extent center.
class ZcbfFilter final : public SafetyFilter {
 public:
  ZcbfFilter(ControlAffineSystem sys, SafeFunction h, ClassKFunction alpha, qp::QpOptions qp_options = {});
  std::string name() const override { return "zcbf"; }
  FilterOutput apply(const Vector& x, const Vector& k) const override;

 private:
  ControlAffineSystem sys_;
  SafeFunction h_;
  ClassKFunction alpha_;
  qp::QpOptions qp_options_;
};

struct SampledFilterConfig {
  std::size_t samples = 200;
  double gamma = 1.0;
  BoundaryNetOptions net;
  qp::QpOptions qp;
};

/// Sampled-boundary filter. For rigid extents the net is built once at the
/// reference pose and moved with the body; other extents are re-sampled at
/// every call.
class SampledFilter final : public SafetyFilter {
 public:
  /// Throws ConfigError when the QP tolerance is not far below the row
  /// tightening (B + gamma A) tau.
  SampledFilter(ControlAffineSystem sys, ExtentFunction extent, SafeFunction h, LipschitzConstants consts,
                SampledFilterConfig config);
  std::string name() const override { return "sampled"; }
  FilterOutput apply(const Vector& x, const Vector& k) const override;

  /// The net used at state x.
  BoundaryNet net_at(const Vector& x) const;
  const LipschitzConstants& constants() const { return consts_; }
  double tightening() const;

 private:
  ControlAffineSystem sys_;
  ExtentFunction extent_;
  SafeFunction h_;
  LipschitzConstants consts_;
  SampledFilterConfig config_;
  std::optional<BoundaryNet> reference_net_;
};

/// Minimum of h over a set of points.
double min_safe_value(const SafeFunction& h, std::span<const Point2> points,
                      kernels::Exec exec = kernels::Exec::Parallel);

}  // namespace eccbf

#endif  // ECCBF_SAFETY_FILTERS_HPP
