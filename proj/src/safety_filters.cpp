#include "eccbf/safety_filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eccbf {

ClassKFunction ClassKFunction::linear(double gain) {
  require(gain > 0.0, "class-K gain must be positive");
  return {Kind::Linear, gain};
}

ClassKFunction ClassKFunction::cubic(double gain) {
  require(gain > 0.0, "class-K gain must be positive");
  return {Kind::Cubic, gain};
}

LipschitzConstants LipschitzConstants::user(double A, double B) {
  require(A >= 0.0 && B >= 0.0, "Lipschitz constants must be nonnegative");
  return {A, B, ConstantsProvenance::UserSupplied, 0, 1.0};
}

namespace {

Vector position_of(const Vector& x, std::size_t dim) { return x.head(static_cast<Eigen::Index>(dim)); }

// dh/dx for h evaluated at the leading coordinates of x.
Vector padded_gradient(const SafeFunction& h, const Vector& x) {
  require(static_cast<std::size_t>(x.size()) >= h.dimension(), "state shorter than the safe function's domain");
  Vector g = Vector::Zero(x.size());
  g.head(static_cast<Eigen::Index>(h.dimension())) = h.gradient(position_of(x, h.dimension()));
  return g;
}

}  // namespace

LinearInputConstraint zcbf_constraint(const SafeFunction& h, const ClassKFunction& alpha,
                                      const ControlAffineSystem& sys, const Vector& x) {
  const Vector dh = padded_gradient(h, x);
  const double hx = h.value(position_of(x, h.dimension()));
  return {sys.actuation(x).transpose() * dh, -dh.dot(sys.drift(x)) - alpha(hx)};
}

LinearInputConstraint eccbf_pointwise(const ExtentFunction& extent, const SafeFunction& h,
                                      const ClassKFunction& alpha1, const ClassKFunction& alpha2,
                                      const ControlAffineSystem& sys, const Vector& x, const Vector& y) {
  const Vector de = extent.gradient_x(x, y);
  return {sys.actuation(x).transpose() * de,
          -de.dot(sys.drift(x)) - alpha1(extent.value(x, y)) - alpha2(h.value(y))};
}

LipschitzConstants estimate_constants(const ExtentFunction& extent, const SafeFunction& h,
                                      const ControlAffineSystem& sys, const EstimationDomain& domain,
                                      const EstimationOptions& options) {
  require(options.resolution >= 2, "estimation grid needs at least 2 points per axis");
  require(options.margin >= 1.0, "estimation margin must be >= 1");
  require(options.boundary_samples >= 2, "estimation needs at least 2 boundary samples");
  require((domain.upper.array() > domain.lower.array()).all(), "estimation box is empty");
  require(h.dimension() == 2 && extent.point_dimension() == 2, "constant estimation is planar only");
  require(extent.state_dimension() == sys.state_dimension(), "extent and system state dimensions differ");

  const auto res = static_cast<std::size_t>(options.resolution);
  auto grid_point = [&](std::size_t i, std::size_t j) {
    const double s = static_cast<double>(i) / static_cast<double>(res - 1);
    const double t = static_cast<double>(j) / static_cast<double>(res - 1);
    return Point2(domain.lower[0] + s * (domain.upper[0] - domain.lower[0]),
                  domain.lower[1] + t * (domain.upper[1] - domain.lower[1]));
  };

  const double a_max = kernels::argmax(
                           res * res,
                           [&](std::size_t idx) {
                             const Point2 y = grid_point(idx / res, idx % res);
                             return h.gradient(Vector(y)).norm();
                           },
                           options.exec)
                           .value;

  const auto heading = sys.heading_index();
  const std::size_t n_headings = heading ? res : 1;
  std::vector<double> angles(options.boundary_samples);
  for (std::size_t i = 0; i < angles.size(); ++i)
    angles[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(angles.size());

  auto state_at = [&](std::size_t idx) {
    Vector x = Vector::Zero(static_cast<Eigen::Index>(sys.state_dimension()));
    const std::size_t pos = idx % (res * res);
    x.head<2>() = grid_point(pos / res, pos % res);
    if (heading) {
      const std::size_t k = idx / (res * res);
      x[static_cast<Eigen::Index>(*heading)] =
          -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_headings);
    }
    return x;
  };

  // Rigid extents: trace once at the reference pose and move the points.
  std::vector<Point2> reference;
  if (extent.is_rigid()) {
    const Vector x0 = reference_pose(extent, state_at(0));
    reference = trace_boundary(extent, x0, angles, options.exec);
  }
  const double M = sys.input_bound();
  const double b_max = kernels::argmax(
                           res * res * n_headings,
                           [&](std::size_t idx) {
                             const Vector x = state_at(idx);
                             std::vector<Point2> ys;
                             if (extent.is_rigid()) {
                               const Eigen::Rotation2Dd rot(extent.heading(x));
                               const Point2 c = extent.center(x).head<2>();
                               for (const Point2& p : reference) ys.push_back(c + rot * p);
                             } else {
                               ys = trace_boundary(extent, x, angles, kernels::Exec::Serial);
                             }
                             const Vector f = sys.drift(x);
                             const Matrix g = sys.actuation(x);
                             double best = 0.0;
                             for (const Point2& y : ys) {
                               const Vector de = extent.gradient_x(x, Vector(y));
                               best = std::max(best, std::abs(de.dot(f)) + M * (g.transpose() * de).norm());
                             }
                             return best;
                           },
                           options.exec)
                           .value;

  return {options.margin * a_max, options.margin * b_max, ConstantsProvenance::GridEstimated, options.resolution,
          options.margin};
}

std::vector<LinearInputConstraint> sampled_constraints(const ExtentFunction& extent, const SafeFunction& h,
                                                       const BoundaryNet& net, const LipschitzConstants& consts,
                                                       double gamma, const ControlAffineSystem& sys,
                                                       const Vector& x) {
  require(gamma > 0.0, "gamma must be positive");
  const double tightening = (consts.B + gamma * consts.A) * net.tau;
  const Vector f = sys.drift(x);
  const Matrix g = sys.actuation(x);
  std::vector<LinearInputConstraint> rows;
  rows.reserve(net.samples.size());
  for (const Point2& s : net.samples) {
    const Vector y = s;
    const Vector de = extent.gradient_x(x, y);
    rows.push_back({g.transpose() * de, tightening - de.dot(f) - gamma * h.value(y)});
  }
  return rows;
}

FilterOutput filter_input(const std::vector<LinearInputConstraint>& constraints, const Vector& k,
                          double input_bound, const qp::QpOptions& options) {
  require(k.allFinite(), "nominal input must be finite");
  qp::HalfspaceQP problem{k, constraints, input_bound};
  const qp::QpSolution sol = qp::solve(problem, options);
  FilterOutput out;
  out.rows = constraints.size();
  out.iterations = sol.iterations;
  switch (sol.status) {
    case qp::QpStatus::Optimal:
      out.status = StepStatus::Ok;
      out.u = sol.u;
      out.active = (sol.u - k).norm() > 1e-9;
      break;
    case qp::QpStatus::Infeasible:
      out.status = StepStatus::Infeasible;
      break;
    case qp::QpStatus::MaxIterations:
      out.status = StepStatus::MaxIterations;
      break;
  }
  if (out.status != StepStatus::Ok) {
    out.u = Vector::Zero(k.size());
    out.failed_constraints = constraints;
  }
  return out;
}

FilterOutput NoFilter::apply(const Vector&, const Vector& k) const {
  FilterOutput out;
  out.u = k;
  out.status = StepStatus::Unfiltered;
  return out;
}

ZcbfFilter::ZcbfFilter(ControlAffineSystem sys, SafeFunction h, ClassKFunction alpha, qp::QpOptions qp_options)
    : sys_(std::move(sys)), h_(std::move(h)), alpha_(alpha), qp_options_(qp_options) {}

FilterOutput ZcbfFilter::apply(const Vector& x, const Vector& k) const {
  return filter_input({zcbf_constraint(h_, alpha_, sys_, x)}, k, sys_.input_bound(), qp_options_);
}

SampledFilter::SampledFilter(ControlAffineSystem sys, ExtentFunction extent, SafeFunction h,
                             LipschitzConstants consts, SampledFilterConfig config)
    : sys_(std::move(sys)), extent_(std::move(extent)), h_(std::move(h)), consts_(consts), config_(config) {
  require(config_.samples >= 2, "sampled filter needs at least 2 samples");
  require(config_.gamma > 0.0, "gamma must be positive");
  require(extent_.state_dimension() == sys_.state_dimension(), "extent and system state dimensions differ");
  if (extent_.is_rigid()) {
    const Vector x0 = reference_pose(extent_, Vector::Zero(static_cast<Eigen::Index>(sys_.state_dimension())));
    reference_net_ = sample_boundary(extent_, x0, config_.samples, config_.net);
    if (!(config_.qp.tol <= 1e-3 * tightening()))
      throw ConfigError("QP tolerance " + std::to_string(config_.qp.tol) +
                        " is not far below the row tightening " + std::to_string(tightening()));
  }
}

double SampledFilter::tightening() const {
  require(reference_net_.has_value(), "tightening is fixed only for rigid extents");
  return (consts_.B + config_.gamma * consts_.A) * reference_net_->tau;
}

BoundaryNet SampledFilter::net_at(const Vector& x) const {
  if (reference_net_) return transform_net(*reference_net_, extent_.center(x).head<2>(), extent_.heading(x));
  BoundaryNetOptions opts = config_.net;
  opts.exec = kernels::Exec::Serial;
  return sample_boundary(extent_, x, config_.samples, opts);
}

FilterOutput SampledFilter::apply(const Vector& x, const Vector& k) const {
  const BoundaryNet net = net_at(x);
  return filter_input(sampled_constraints(extent_, h_, net, consts_, config_.gamma, sys_, x), k,
                      sys_.input_bound(), config_.qp);
}

double min_safe_value(const SafeFunction& h, std::span<const Point2> points, kernels::Exec exec) {
  require(!points.empty(), "min_safe_value needs at least one point");
  return kernels::argmin(points.size(), [&](std::size_t i) { return h.value(points[i]); }, exec).value;
}

}  // namespace eccbf
