#ifndef ECCBF_QP_HPP
#define ECCBF_QP_HPP

#include "eccbf/common.hpp"
#include "eccbf/kernels.hpp"

#include <string>
#include <vector>

namespace eccbf {

/// a^T u >= b.
struct LinearInputConstraint {
  Vector a;
  double b = 0.0;

  /// Zero row with b <= 0: satisfied by every input.
  bool is_vacuous() const { return a.isZero(0.0) && b <= 0.0; }
  /// Zero row with b > 0: satisfied by no input.
  bool is_contradictory() const { return a.isZero(0.0) && b > 0.0; }
  double violation(const Vector& u) const { return b - a.dot(u); }
};

namespace qp {

/// minimize |u - target|^2 subject to every row and |u|_2 <= ball_radius.
struct HalfspaceQP {
  Vector target;
  std::vector<LinearInputConstraint> rows;
  double ball_radius = 1.0;
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

std::string to_string(QpStatus status);

struct QpSolution {
  QpStatus status = QpStatus::MaxIterations;
  Vector u;
  double objective = 0.0;  // |u - target|^2
  int iterations = 0;
  double residual = 0.0;   // max constraint violation at u (rows and ball)
};

enum class QpMethod { Auto, Dykstra, ActiveSet };

struct QpOptions {
  double tol = 1e-8;
  int max_iter = 50000;
  QpMethod method = QpMethod::Auto;
  /// Auto uses exact active-set enumeration up to this many rows.
  std::size_t active_set_row_limit = 16;
  /// Periodically try to finish Dykstra by solving the KKT system on the
  /// rows closest to the iterate; accepted only with a valid certificate.
  bool polish = true;
  int polish_interval = 10;
};

/// Throws ContractViolation on malformed problems (dimensions, non-finite data).
void validate(const HalfspaceQP& problem);

double max_violation(const HalfspaceQP& problem, const Vector& u);

QpSolution solve(const HalfspaceQP& problem, const QpOptions& options = {});

/// Dykstra's cyclic projection over the halfspaces and the ball.
QpSolution solve_dykstra(const HalfspaceQP& problem, const QpOptions& options = {});

/// Enumerates every linearly independent set of at most m active rows, with
/// and without the ball active, and keeps the best feasible candidate.
QpSolution solve_active_set(const HalfspaceQP& problem, double tol = 1e-8);

/// Brute-force search (m <= 3): a grid over the first m - 1 coordinates of
/// the ball, refined twice around the best cell, with the last coordinate
/// minimized exactly over its feasible interval. Independent of the solvers
/// above; used to check them.
QpSolution oracle_solve(const HalfspaceQP& problem, int grid_resolution,
                        kernels::Exec exec = kernels::Exec::Parallel);

}  // namespace qp
}  // namespace eccbf

#endif  // ECCBF_QP_HPP
