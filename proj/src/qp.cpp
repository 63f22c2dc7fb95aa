#include "eccbf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>

namespace eccbf::qp {

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

void validate(const HalfspaceQP& problem) {
  const auto m = problem.target.size();
  require(m >= 1, "QP needs at least one input dimension");
  require(problem.target.allFinite(), "QP target must be finite");
  require(problem.ball_radius > 0.0 && std::isfinite(problem.ball_radius), "QP ball radius must be positive");
  for (const auto& row : problem.rows) {
    require(row.a.size() == m, "QP row has the wrong dimension");
    require(row.a.allFinite() && std::isfinite(row.b), "QP rows must be finite");
  }
}

double max_violation(const HalfspaceQP& problem, const Vector& u) {
  double worst = std::max(0.0, u.norm() - problem.ball_radius);
  for (const auto& row : problem.rows) worst = std::max(worst, row.violation(u));
  return worst;
}

namespace {

bool feasible(const HalfspaceQP& p, const Vector& u, double tol) {
  if (u.norm() > p.ball_radius + tol * (1.0 + p.ball_radius)) return false;
  for (const auto& row : p.rows)
    if (row.violation(u) > tol * (1.0 + std::abs(row.b))) return false;
  return true;
}

QpSolution finish(const HalfspaceQP& p, QpStatus status, Vector u, int iterations) {
  QpSolution s;
  s.status = status;
  s.objective = (u - p.target).squaredNorm();
  s.residual = max_violation(p, u);
  s.u = std::move(u);
  s.iterations = iterations;
  return s;
}

struct Candidate {
  Vector u;
  double objective;
  bool kkt;  // multipliers nonnegative
};

// Minimizer of |u - k|^2 on {a_i^T u = b_i, i in S} (and |u| = M when
// on_ball), with the sign of its multipliers. Empty for dependent rows.
std::optional<Candidate> face_candidate(const HalfspaceQP& p, std::span<const std::size_t> S, bool on_ball,
                                        double tol) {
  const Vector& k = p.target;
  const auto m = k.size();
  const auto s = static_cast<Eigen::Index>(S.size());
  const double M = p.ball_radius;
  Matrix A(s, m);
  Vector b(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    A.row(i) = p.rows[S[static_cast<std::size_t>(i)]].a.transpose();
    b[i] = p.rows[S[static_cast<std::size_t>(i)]].b;
  }
  Eigen::FullPivLU<Matrix> lu;
  if (s > 0) {
    const Matrix G = A * A.transpose();
    lu.compute(G);
    lu.setThreshold(1e-11);
    if (!lu.isInvertible()) return std::nullopt;
  }
  auto solve_g = [&](const Vector& r) -> Vector { return s > 0 ? Vector(lu.solve(r)) : Vector(0); };
  const double kkt_tol = 1e-9 * (1.0 + k.norm());

  if (!on_ball) {
    const Vector lambda = solve_g(b - A * k);
    Vector u = k + A.transpose() * lambda;
    const bool kkt = s == 0 || lambda.minCoeff() >= -kkt_tol;
    return Candidate{u, (u - k).squaredNorm(), kkt};
  }

  const Vector u0 = s > 0 ? Vector(A.transpose() * solve_g(b)) : Vector(Vector::Zero(m));
  const double r2 = M * M - u0.squaredNorm();
  if (r2 < 0.0) return std::nullopt;
  const double r = std::sqrt(r2);
  const Vector z = s > 0 ? Vector(k - A.transpose() * solve_g(A * k)) : k;
  const double nz = z.norm();
  if (nz <= 1e-14 * (1.0 + k.norm())) {
    // k is orthogonal to the face; every point of the circle is equally far.
    Matrix proj = Matrix::Identity(m, m);
    if (s > 0) proj -= A.transpose() * lu.solve(A);
    Eigen::Index col = 0;
    proj.colwise().norm().maxCoeff(&col);
    const double cn = proj.col(col).norm();
    if (cn <= 1e-12) return std::nullopt;
    Vector u = u0 + r * proj.col(col) / cn;
    return Candidate{u, (u - k).squaredNorm(), false};
  }
  Vector u = u0 + r * z / nz;
  if (r == 0.0) return Candidate{u, (u - k).squaredNorm(), false};
  const double mu = nz / r - 1.0;
  bool kkt = mu >= -tol;
  if (s > 0) {
    const Vector lambda = solve_g(A * ((1.0 + mu) * u - k));
    kkt = kkt && lambda.minCoeff() >= -kkt_tol;
  }
  return Candidate{u, (u - k).squaredNorm(), kkt};
}

// Visits every subset of pool with size <= max_size, in lexicographic order.
void for_each_subset(std::span<const std::size_t> pool, std::size_t max_size,
                     const std::function<void(std::span<const std::size_t>)>& visit) {
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    visit(chosen);
    if (chosen.size() == max_size) return;
    for (std::size_t i = start; i < pool.size(); ++i) {
      chosen.push_back(pool[i]);
      rec(i + 1);
      chosen.pop_back();
    }
  };
  rec(0);
}

// Best feasible face candidate drawn from pool. With require_kkt the winner
// must also carry nonnegative multipliers, which certifies optimality.
std::optional<Candidate> best_candidate(const HalfspaceQP& p, std::span<const std::size_t> pool, double tol,
                                        bool require_kkt, int* examined) {
  const std::size_t m = static_cast<std::size_t>(p.target.size());
  std::optional<Candidate> best;
  auto consider = [&](std::span<const std::size_t> S, bool on_ball) {
    if (examined) ++*examined;
    auto c = face_candidate(p, S, on_ball, tol);
    if (!c || (require_kkt && !c->kkt) || !feasible(p, c->u, tol)) return;
    if (!best || c->objective < best->objective) best = std::move(c);
  };
  for_each_subset(pool, m, [&](std::span<const std::size_t> S) { consider(S, false); });
  for_each_subset(pool, m - 1, [&](std::span<const std::size_t> S) { consider(S, true); });
  return best;
}

// Indices of rows that actually constrain u; sets contradictory when a zero
// row demands b > 0.
std::vector<std::size_t> active_rows(const HalfspaceQP& p, bool& contradictory) {
  std::vector<std::size_t> pool;
  contradictory = false;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    if (p.rows[i].is_contradictory()) contradictory = true;
    if (!p.rows[i].a.isZero(0.0)) pool.push_back(i);
  }
  return pool;
}

}  // namespace

QpSolution solve_active_set(const HalfspaceQP& problem, double tol) {
  validate(problem);
  bool contradictory = false;
  const auto pool = active_rows(problem, contradictory);
  if (contradictory) return finish(problem, QpStatus::Infeasible, problem.target, 0);
  int examined = 0;
  const auto best = best_candidate(problem, pool, tol, false, &examined);
  if (!best) return finish(problem, QpStatus::Infeasible, problem.target, examined);
  return finish(problem, QpStatus::Optimal, best->u, examined);
}

QpSolution solve_dykstra(const HalfspaceQP& problem, const QpOptions& options) {
  validate(problem);
  require(options.tol > 0.0, "QP tolerance must be positive");
  require(options.max_iter > 0, "QP iteration budget must be positive");
  bool contradictory = false;
  const auto pool = active_rows(problem, contradictory);
  if (contradictory) return finish(problem, QpStatus::Infeasible, problem.target, 0);

  const auto m = problem.target.size();
  const double M = problem.ball_radius;
  const double tol = options.tol;
  std::vector<double> row_norm2(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) row_norm2[i] = problem.rows[pool[i]].a.squaredNorm();

  Vector x = problem.target;
  // one increment per set; the ball is last
  std::vector<Vector> incr(pool.size() + 1, Vector::Zero(m));
  Vector z(m), y(m);
  double displacement = 0.0;

  auto polish = [&]() -> std::optional<Vector> {
    std::vector<std::size_t> order(pool.size());
    std::vector<double> dist(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto& row = problem.rows[pool[i]];
      dist[i] = (row.a.dot(x) - row.b) / std::sqrt(row_norm2[i]);
      order[i] = i;
    }
    const std::size_t keep = std::min(pool.size(), static_cast<std::size_t>(2 * m + 8));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    std::vector<std::size_t> near(keep);
    for (std::size_t i = 0; i < keep; ++i) near[i] = pool[order[i]];
    std::sort(near.begin(), near.end());
    auto c = best_candidate(problem, near, tol, true, nullptr);
    if (!c) return std::nullopt;
    return c->u;
  };

  for (int cycle = 1; cycle <= options.max_iter; ++cycle) {
    const Vector start = x;
    double incr_change = 0.0;
    for (std::size_t i = 0; i <= pool.size(); ++i) {
      z = x + incr[i];
      if (i < pool.size()) {
        const auto& row = problem.rows[pool[i]];
        const double v = row.b - row.a.dot(z);
        y = v > 0.0 ? Vector(z + (v / row_norm2[i]) * row.a) : z;
      } else {
        const double nz = z.norm();
        y = nz > M ? Vector(z * (M / nz)) : z;
      }
      const Vector next_incr = z - y;
      incr_change += (next_incr - incr[i]).squaredNorm();
      incr[i] = next_incr;
      x = y;
    }
    displacement = (x - start).norm();
    if (incr_change <= tol * tol && max_violation(problem, x) <= tol)
      return finish(problem, QpStatus::Optimal, x, cycle);
    if (options.polish && cycle % options.polish_interval == 0)
      if (auto u = polish()) return finish(problem, QpStatus::Optimal, *u, cycle);
  }
  const bool stalled = displacement < tol / 10.0;
  const QpStatus status =
      (max_violation(problem, x) > 10.0 * tol && stalled) ? QpStatus::Infeasible : QpStatus::MaxIterations;
  return finish(problem, status, x, options.max_iter);
}

QpSolution solve(const HalfspaceQP& problem, const QpOptions& options) {
  switch (options.method) {
    case QpMethod::Dykstra: return solve_dykstra(problem, options);
    case QpMethod::ActiveSet: return solve_active_set(problem, options.tol);
    case QpMethod::Auto: break;
  }
  std::size_t nonzero = 0;
  for (const auto& row : problem.rows) nonzero += row.a.isZero(0.0) ? 0 : 1;
  if (nonzero <= options.active_set_row_limit) return solve_active_set(problem, options.tol);
  return solve_dykstra(problem, options);
}

QpSolution oracle_solve(const HalfspaceQP& problem, int grid_resolution, kernels::Exec exec) {
  validate(problem);
  const auto m = static_cast<Eigen::Index>(problem.target.size());
  require(m <= 3, "grid oracle supports at most three inputs");
  require(grid_resolution >= 3, "grid oracle resolution must be at least 3");
  const double M = problem.ball_radius;
  const auto R = static_cast<std::size_t>(grid_resolution);
  const Eigen::Index g = m - 1;  // gridded coordinates; the last one is solved exactly
  std::size_t total = 1;
  for (Eigen::Index d = 0; d < g; ++d) total *= R;

  // Best last coordinate for a fixed prefix: the target's value clamped to
  // the feasible interval cut out by the ball and the rows. NaN if empty.
  auto complete = [&](Vector& u) {
    const Eigen::Index last = g;
    const double prefix_sq = u.head(g).squaredNorm();
    if (prefix_sq > M * M) return std::numeric_limits<double>::quiet_NaN();
    double hi = std::sqrt(M * M - prefix_sq), lo = -hi;
    for (const auto& row : problem.rows) {
      const double rest = row.b - row.a.head(g).dot(u.head(g));
      const double c = row.a[last];
      if (c > 0.0) lo = std::max(lo, rest / c);
      else if (c < 0.0) hi = std::min(hi, rest / c);
      else if (rest > 0.0) return std::numeric_limits<double>::quiet_NaN();
    }
    if (lo > hi) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(problem.target[last], lo, hi);
  };
  auto point = [&](const Vector& lower, double h, std::size_t flat) {
    Vector u = Vector::Zero(m);
    for (Eigen::Index d = 0; d < g; ++d) {
      u[d] = lower[d] + h * static_cast<double>(flat % R);
      flat /= R;
    }
    u[g] = complete(u);
    return u;
  };
  auto scan = [&](const Vector& lower, double h) {
    return kernels::argmin(
        total,
        [&](std::size_t flat) {
          const Vector u = point(lower, h, flat);
          return std::isnan(u[g]) ? std::numeric_limits<double>::infinity() : (u - problem.target).squaredNorm();
        },
        exec);
  };

  // The objective minimized over the last coordinate is convex in the
  // prefix, so the best grid point lies within one cell of the optimum.
  Vector lower = Vector::Constant(g, -M);
  double h = g > 0 ? 2.0 * M / static_cast<double>(R - 1) : 0.0;
  auto best = scan(lower, h);
  if (!std::isfinite(best.value)) return finish(problem, QpStatus::Infeasible, problem.target, 1);
  Vector u = point(lower, h, best.index);
  for (int pass = 2; pass <= 3 && g > 0; ++pass) {
    const double span = 3.0 * h;
    lower = u.head(g) - Vector::Constant(g, span);
    const double refined_h = 2.0 * span / static_cast<double>(R - 1);
    const auto refined = scan(lower, refined_h);
    if (std::isfinite(refined.value) && refined.value <= best.value) {
      best = refined;
      u = point(lower, refined_h, refined.index);
    }
    h = refined_h;
  }
  return finish(problem, QpStatus::Optimal, u, 3);
}

}  // namespace eccbf::qp
