#ifndef ECCBF_SDP_HPP
#define ECCBF_SDP_HPP

#include "eccbf/common.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eccbf::sdp {

struct LmiTerm {
  std::size_t var;
  Matrix coefficient;  // symmetric
};

/// Affine matrix map v -> constant + sum_t v[term.var] * term.coefficient.
struct LmiBlock {
  Matrix constant;
  std::vector<LmiTerm> terms;

  Eigen::Index size() const { return constant.rows(); }
  Matrix evaluate(const Vector& v) const;
};

/// minimize c^T v  s.t.  A v = b,  F_j(v) >= 0 (PSD) for every block j.
struct SdpProblem {
  std::size_t num_vars = 0;
  Vector objective;
  Matrix eq_matrix;  // rows x num_vars (may have zero rows)
  Vector eq_rhs;
  std::vector<LmiBlock> blocks;
  std::optional<Vector> initial_point;
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, MaxIterations };

std::string to_string(SdpStatus status);

struct SdpOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  double step_fraction = 0.98;
  bool record_trace = false;
};

struct IterateRecord {
  double primal_objective;
  double dual_objective;
  double complementarity;  // sum_j <S_j, Z_j>
  double primal_residual;  // relative, equalities and slack consistency
  double dual_residual;    // relative
  double primal_step;
  double dual_step;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::MaxIterations;
  Vector v;
  double objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  // |primal - dual|
  std::vector<double> block_min_eigenvalues;  // of F_j(v)
  double equality_residual = 0.0;             // max |A v - b|
  int iterations = 0;
  std::vector<Matrix> dual_blocks;            // Z_j
  std::string message;
  std::vector<IterateRecord> trace;
};

/// Throws ContractViolation when dimensions are inconsistent, a coefficient
/// is not symmetric, or a block is larger than 32.
void validate(const SdpProblem& problem);

/// Primal-dual path-following interior point method (Nesterov-Todd scaling,
/// Mehrotra predictor-corrector). Dependent equality rows are dropped first.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

/// All eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
Vector symmetric_eigenvalues(const Matrix& m, double tol = 1e-12);

/// Smallest eigenvalue of a symmetric matrix.
double eig_floor(const Matrix& m);

/// Plain-text problem dump:
///
///   eccbf-sdp 1
///   variables <n>
///   blocks <count> <size_1> ... <size_count>
///   equalities <rows> <nnz>        then nnz lines "<row> <col> <value>"
///   rhs <nnz>                      then nnz lines "<row> <value>"
///   objective <nnz>                then nnz lines "<var> <value>"
///   block <index> <nnz>            then nnz lines "<var> <row> <col> <value>"
///   end
///
/// One "block" section per block; var -1 is the constant term; entries are
/// upper-triangular (row <= col). All values use 17 significant digits.
std::string dump(const SdpProblem& problem);
SdpProblem parse_dump(std::string_view text);

}  // namespace eccbf::sdp

#endif  // ECCBF_SDP_HPP
