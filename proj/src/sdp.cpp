#include "eccbf/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace eccbf::sdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double symmetry_defect(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

// Frobenius inner product.
double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

struct Reduced {
  Matrix a;  // independent rows
  Vector b;
};

Reduced independent_rows(const Matrix& a, const Vector& b) {
  if (a.rows() == 0) return {a, b};
  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()[i]);
  std::sort(keep.begin(), keep.end());
  Reduced r{Matrix(static_cast<Eigen::Index>(keep.size()), a.cols()),
            Vector(static_cast<Eigen::Index>(keep.size()))};
  for (std::size_t i = 0; i < keep.size(); ++i) {
    r.a.row(static_cast<Eigen::Index>(i)) = a.row(keep[i]);
    r.b[static_cast<Eigen::Index>(i)] = b[keep[i]];
  }
  return r;
}

// Largest alpha with X + alpha dX still PSD (infinity if unbounded).
double max_step(const Eigen::LLT<Matrix>& chol, const Matrix& dx) {
  const Matrix l_inv_dx = chol.matrixL().solve(dx);
  const Matrix m = chol.matrixL().solve(l_inv_dx.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(m), Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

// Nesterov-Todd scaling: G^-1 S G^-T = G^T Z G = diag(lambda), so W = G G^T
// satisfies W Z W = S.
struct Scaling {
  Matrix g;
  Matrix g_inv;
  Vector lambda;
};

bool nt_scaling(const Matrix& s, const Matrix& z, Scaling& out) {
  Eigen::LLT<Matrix> ls(s);
  Eigen::LLT<Matrix> lz(z);
  if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  const Matrix lsm = ls.matrixL();
  const Matrix lzm = lz.matrixL();
  Eigen::JacobiSVD<Matrix> svd(lzm.transpose() * lsm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector sigma = svd.singularValues();
  if (!(sigma.minCoeff() > 0.0)) return false;
  const Vector root = sigma.cwiseSqrt();
  const Matrix v = svd.matrixV();
  // G = Ls V Sigma^-1/2, G^-1 = Sigma^1/2 V^T Ls^-1.
  out.g = lsm * v * root.cwiseInverse().asDiagonal();
  out.g_inv = lsm.transpose().triangularView<Eigen::Upper>().solve(Matrix(v * root.asDiagonal())).transpose();
  out.lambda = sigma;
  return true;
}

struct Iterate {
  Vector v;
  Vector y;
  std::vector<Matrix> s;
  std::vector<Matrix> z;
};

}  // namespace

Matrix LmiBlock::evaluate(const Vector& v) const {
  Matrix out = constant;
  for (const auto& t : terms) out += v[static_cast<Eigen::Index>(t.var)] * t.coefficient;
  return out;
}

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::Unbounded: return "unbounded";
    case SdpStatus::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

void validate(const SdpProblem& p) {
  const auto n = static_cast<Eigen::Index>(p.num_vars);
  require(p.num_vars > 0, "sdp: no decision variables");
  require(p.objective.size() == n, "sdp: objective length mismatch");
  require(p.eq_matrix.rows() == p.eq_rhs.size(), "sdp: equality rhs length mismatch");
  require(p.eq_matrix.rows() == 0 || p.eq_matrix.cols() == n, "sdp: equality matrix column mismatch");
  require(p.objective.allFinite() && p.eq_matrix.allFinite() && p.eq_rhs.allFinite(),
          "sdp: non-finite data");
  if (p.initial_point) require(p.initial_point->size() == n, "sdp: initial point length mismatch");
  for (const auto& blk : p.blocks) {
    const auto k = blk.size();
    require(k > 0 && blk.constant.cols() == k, "sdp: block constant must be square and nonempty");
    require(k <= 32, "sdp: block larger than 32");
    const double scale = 1e-12 * (1.0 + blk.constant.cwiseAbs().maxCoeff());
    require(blk.constant.allFinite() && symmetry_defect(blk.constant) <= scale,
            "sdp: block constant not symmetric");
    for (const auto& t : blk.terms) {
      require(t.var < p.num_vars, "sdp: block term references an unknown variable");
      require(t.coefficient.rows() == k && t.coefficient.cols() == k, "sdp: block term size mismatch");
      require(t.coefficient.allFinite() &&
                  symmetry_defect(t.coefficient) <= 1e-12 * (1.0 + t.coefficient.cwiseAbs().maxCoeff()),
              "sdp: block term not symmetric");
    }
  }
}

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& opt) {
  validate(problem);
  const auto n = static_cast<Eigen::Index>(problem.num_vars);
  const std::size_t nb = problem.blocks.size();

  // Merge repeated variables within a block so each (block, var) has one matrix.
  std::vector<std::vector<LmiTerm>> terms(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    std::map<std::size_t, Matrix> merged;
    for (const auto& t : problem.blocks[j].terms) {
      auto it = merged.find(t.var);
      if (it == merged.end()) merged.emplace(t.var, symmetrized(t.coefficient));
      else it->second += symmetrized(t.coefficient);
    }
    for (auto& [var, mat] : merged) terms[j].push_back({var, std::move(mat)});
  }
  std::vector<Matrix> f0(nb);
  for (std::size_t j = 0; j < nb; ++j) f0[j] = symmetrized(problem.blocks[j].constant);
  auto eval_block = [&](std::size_t j, const Vector& v) {
    Matrix out = f0[j];
    for (const auto& t : terms[j]) out += v[static_cast<Eigen::Index>(t.var)] * t.coefficient;
    return out;
  };
  auto eval_linear = [&](std::size_t j, const Vector& dv) {
    Matrix out = Matrix::Zero(f0[j].rows(), f0[j].cols());
    for (const auto& t : terms[j]) out += dv[static_cast<Eigen::Index>(t.var)] * t.coefficient;
    return out;
  };
  auto adjoint = [&](const std::vector<Matrix>& z) {
    Vector out = Vector::Zero(n);
    for (std::size_t j = 0; j < nb; ++j)
      for (const auto& t : terms[j]) out[static_cast<Eigen::Index>(t.var)] += inner(t.coefficient, z[j]);
    return out;
  };

  // Gram matrix of the block map, used to restore dual feasibility of dZ.
  Matrix f_gram = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < nb; ++j)
    for (const auto& ta : terms[j])
      for (const auto& tb : terms[j])
        f_gram(static_cast<Eigen::Index>(ta.var), static_cast<Eigen::Index>(tb.var)) +=
            inner(ta.coefficient, tb.coefficient);
  const Eigen::CompleteOrthogonalDecomposition<Matrix> f_gram_cod(f_gram);

  const Reduced eq = independent_rows(problem.eq_matrix, problem.eq_rhs);
  const Eigen::Index p = eq.a.rows();
  const Vector& c = problem.objective;

  std::size_t total_dim = 0;
  for (const auto& m : f0) total_dim += static_cast<std::size_t>(m.rows());

  SdpSolution sol;
  Iterate it;
  if (problem.initial_point) {
    it.v = *problem.initial_point;
  } else if (p > 0) {
    it.v = eq.a.completeOrthogonalDecomposition().solve(eq.b);
  } else {
    it.v = Vector::Zero(n);
  }
  it.y = Vector::Zero(p);
  double f_scale = 1.0;
  for (const auto& m : f0) f_scale = std::max(f_scale, m.norm());
  double a_scale = 1.0;
  for (const auto& blk : terms)
    for (const auto& t : blk) a_scale = std::max(a_scale, t.coefficient.norm());
  for (std::size_t j = 0; j < nb; ++j) {
    const auto k = f0[j].rows();
    const double sq = std::sqrt(static_cast<double>(k));
    // Start S at F(v) when it is comfortably interior; otherwise at a multiple of I.
    const Matrix fv = eval_block(j, it.v);
    const double lmin =
        Eigen::SelfAdjointEigenSolver<Matrix>(fv, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    const double xi = std::max({10.0, sq, fv.norm()});
    if (lmin >= 1e-3 * std::max(1.0, fv.norm()))
      it.s.push_back(fv);
    else
      it.s.push_back(xi * Matrix::Identity(k, k));
    it.z.push_back(std::max({10.0, sq, f_scale, a_scale, c.norm()}) * Matrix::Identity(k, k));
  }

  const double b_norm = eq.b.size() ? eq.b.norm() : 0.0;
  const double c_norm = c.norm();
  double f0_norm = 0.0;
  for (const auto& m : f0) f0_norm += m.squaredNorm();
  f0_norm = std::sqrt(f0_norm);

  auto finish = [&](SdpStatus status, std::string message) {
    sol.status = status;
    sol.message = std::move(message);
    sol.v = it.v;
    sol.objective = c.dot(it.v);
    sol.dual_blocks = it.z;
    sol.block_min_eigenvalues.clear();
    for (std::size_t j = 0; j < nb; ++j) sol.block_min_eigenvalues.push_back(eig_floor(eval_block(j, it.v)));
    sol.equality_residual =
        problem.eq_matrix.rows() ? (problem.eq_matrix * it.v - problem.eq_rhs).cwiseAbs().maxCoeff() : 0.0;
    if (status == SdpStatus::Optimal && sol.equality_residual > std::max(1e-7, 10.0 * opt.feas_tol * (1.0 + b_norm))) {
      // Dropped rows were inconsistent with the kept ones.
      sol.status = SdpStatus::Infeasible;
      sol.message = "equality system is inconsistent";
    }
    return sol;
  };

  // Near the boundary the Newton directions lose accuracy and the dual
  // residual can stall above feas_tol. The best iterate meeting a
  // reduced-accuracy bar is kept and returned as optimal on failure. The bar
  // leaves out the objective gap: once the dual residual stalls the gap is
  // dominated by that residual rather than by complementarity.
  struct Best {
    Iterate it;
    double merit = kInf;  // max of the ratios to the reduced bar; <= 1 is acceptable
    double dobj = 0.0;
    double gap = 0.0;
    int iteration = 0;
  } best;
  auto fail = [&](const std::string& message) {
    if (best.merit <= 1.0) {
      it = best.it;
      sol.dual_objective = best.dobj;
      sol.gap = best.gap;
      sol.iterations = best.iteration;
      return finish(SdpStatus::Optimal, "converged to reduced accuracy (" + message + ")");
    }
    return finish(SdpStatus::MaxIterations, message);
  };

  for (int iter = 0;; ++iter) {
    sol.iterations = iter;
    // Residuals.
    const Vector rp = p ? Vector(eq.b - eq.a * it.v) : Vector();
    std::vector<Matrix> e(nb);
    double e_norm = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      e[j] = eval_block(j, it.v) - it.s[j];
      e_norm += e[j].squaredNorm();
    }
    e_norm = std::sqrt(e_norm);
    const Vector fz = adjoint(it.z);
    const Vector rd = c - fz - (p ? Vector(eq.a.transpose() * it.y) : Vector::Zero(n));

    double comp = 0.0;
    for (std::size_t j = 0; j < nb; ++j) comp += inner(it.s[j], it.z[j]);
    const double mu = total_dim ? comp / static_cast<double>(total_dim) : 0.0;
    const double pobj = c.dot(it.v);
    double dobj = p ? eq.b.dot(it.y) : 0.0;
    for (std::size_t j = 0; j < nb; ++j) dobj -= inner(f0[j], it.z[j]);
    const double pinf = std::max(p ? rp.norm() / (1.0 + b_norm) : 0.0, e_norm / (1.0 + f0_norm));
    const double dinf = rd.norm() / (1.0 + c_norm);
    const double relgap = std::max(std::abs(pobj - dobj), comp) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.dual_objective = dobj;
    sol.gap = std::abs(pobj - dobj);

    if (pinf <= opt.feas_tol && dinf <= opt.feas_tol && relgap <= opt.gap_tol)
      return finish(SdpStatus::Optimal, "converged");
    const double relcomp = comp / (1.0 + std::abs(pobj));
    const double merit =
        std::max({pinf / (10.0 * opt.feas_tol), dinf / (1000.0 * opt.feas_tol), relcomp / (100.0 * opt.gap_tol)});
    if (merit < best.merit) {
      best = {it, merit, dobj, std::abs(pobj - dobj), iter};
    } else if (best.merit <= 1.0 && iter - best.iteration >= 8) {
      return fail("no progress");
    }
    // (y, Z) scaled by 1/dobj approaches a Farkas certificate of primal infeasibility.
    if (dobj > 1.0 / opt.feas_tol && (c - rd).norm() <= 1e-6 * dobj)
      return finish(SdpStatus::Infeasible, "dual objective diverged");
    if (pobj < -1.0 / opt.feas_tol && pinf <= std::sqrt(opt.feas_tol))
      return finish(SdpStatus::Unbounded, "primal objective diverged");
    if (iter >= opt.max_iter) return fail("iteration limit reached");

    // Scaling and Schur complement.
    std::vector<Scaling> sc(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      if (!nt_scaling(it.s[j], it.z[j], sc[j]))
        return fail("iterate left the PSD cone numerically");
    }
    Matrix h = Matrix::Zero(n, n);
    std::vector<std::vector<Matrix>> scaled(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      for (const auto& t : terms[j]) scaled[j].push_back(sc[j].g_inv * t.coefficient * sc[j].g_inv.transpose());
      for (std::size_t a = 0; a < terms[j].size(); ++a)
        for (std::size_t b = a; b < terms[j].size(); ++b) {
          const double val = inner(scaled[j][a], scaled[j][b]);
          const auto ia = static_cast<Eigen::Index>(terms[j][a].var);
          const auto ib = static_cast<Eigen::Index>(terms[j][b].var);
          h(ia, ib) += val;
          if (a != b) h(ib, ia) += val;
        }
    }
    // KKT matrix [[H, -A^T], [A, 0]], small enough for a full-pivot LU. H
    // grows like 1/mu along degenerate directions, so both variable groups are
    // equilibrated first: Dv = diag(H)^-1/2, Dy = 1 / row norms of A Dv.
    Vector dv_scale(n);
    for (Eigen::Index i = 0; i < n; ++i) dv_scale[i] = h(i, i) > 0.0 ? 1.0 / std::sqrt(h(i, i)) : 1.0;
    Matrix a_scaled = p ? Matrix(eq.a * dv_scale.asDiagonal()) : Matrix(0, n);
    Vector dy_scale(p);
    for (Eigen::Index r = 0; r < p; ++r) {
      const double nr = a_scaled.row(r).norm();
      dy_scale[r] = nr > 0.0 ? 1.0 / nr : 1.0;
    }
    Matrix kkt = Matrix::Zero(n + p, n + p);
    kkt.topLeftCorner(n, n) = dv_scale.asDiagonal() * h * dv_scale.asDiagonal();
    if (p) {
      a_scaled = dy_scale.asDiagonal() * a_scaled;
      kkt.topRightCorner(n, p) = -a_scaled.transpose();
      kkt.bottomLeftCorner(p, n) = a_scaled;
    }
    const Eigen::FullPivLU<Matrix> kkt_lu(kkt);
    bool kkt_ok = true;
    // Solves [[H, -A^T], [A, 0]] (dv, dy) = (top, bottom) with one refinement step.
    auto kkt_solve = [&](const Vector& top, const Vector& bottom) {
      Vector rhs(n + p);
      rhs.head(n) = dv_scale.asDiagonal() * top;
      if (p) rhs.tail(p) = dy_scale.asDiagonal() * bottom;
      Vector z = kkt_lu.solve(rhs);
      z += kkt_lu.solve(Vector(rhs - kkt * z));
      if (!z.allFinite()) kkt_ok = false;
      Vector out(n + p);
      out.head(n) = dv_scale.asDiagonal() * z.head(n);
      if (p) out.tail(p) = dy_scale.asDiagonal() * z.tail(p);
      return out;
    };
    // W^-1 E W^-1 with W^-1 = G^-T G^-1.
    std::vector<Matrix> wew(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      const Matrix ge = sc[j].g_inv * e[j] * sc[j].g_inv.transpose();
      wew[j] = sc[j].g_inv.transpose() * ge * sc[j].g_inv;
    }

    struct Direction {
      Vector dv, dy;
      std::vector<Matrix> ds, dz;
      std::vector<Matrix> dz_fix;  // restores F^T dZ + A^T dy = r_d
    };
    // Solves the linearized system with complementarity right-hand side R_j
    // (dZ_j + W^-1 dS_j W^-1 = R_j).
    auto newton = [&](const std::vector<Matrix>& r) {
      Direction d;
      Vector g = -rd;
      for (std::size_t j = 0; j < nb; ++j) {
        const Matrix rhs = r[j] - wew[j];
        for (const auto& t : terms[j]) g[static_cast<Eigen::Index>(t.var)] += inner(t.coefficient, rhs);
      }
      const Vector x = kkt_solve(g, rp);
      d.dv = x.head(n);
      d.dy = x.tail(p);
      for (std::size_t j = 0; j < nb; ++j) {
        Matrix ds = eval_linear(j, d.dv) + e[j];
        const Matrix gds = sc[j].g_inv * ds * sc[j].g_inv.transpose();
        d.dz.push_back(symmetrized(r[j] - sc[j].g_inv.transpose() * gds * sc[j].g_inv));
        d.ds.push_back(symmetrized(ds));
      }
      // F^T dZ + A^T dy = r_d holds only up to eps |H| |dv|, and |H| grows
      // like 1/mu. The least-norm fix in the range of F removes that drift
      // but can push Z toward its boundary, so it is applied by the caller.
      Vector defect = rd - adjoint(d.dz);
      if (p) defect -= eq.a.transpose() * d.dy;
      const Vector w = f_gram_cod.solve(defect);
      for (std::size_t j = 0; j < nb; ++j) d.dz_fix.push_back(eval_linear(j, w));
      return d;
    };
    auto step_lengths = [&](const Direction& d, double fraction) {
      double ap = 1.0, ad = 1.0;
      for (std::size_t j = 0; j < nb; ++j) {
        Eigen::LLT<Matrix> ls(it.s[j]);
        Eigen::LLT<Matrix> lz(it.z[j]);
        ap = std::min(ap, fraction * max_step(ls, d.ds[j]));
        ad = std::min(ad, fraction * max_step(lz, d.dz[j]));
      }
      return std::pair{ap, ad};
    };

    // Predictor: R = -Z.
    std::vector<Matrix> r_aff(nb);
    for (std::size_t j = 0; j < nb; ++j) r_aff[j] = -it.z[j];
    const Direction aff = newton(r_aff);
    if (!kkt_ok) return fail("Newton system is singular");
    const auto [ap_aff, ad_aff] = step_lengths(aff, 1.0);
    double comp_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j)
      comp_aff += inner(it.s[j] + ap_aff * aff.ds[j], it.z[j] + ad_aff * aff.dz[j]);
    const double mu_aff = total_dim ? comp_aff / static_cast<double>(total_dim) : 0.0;
    const double sigma = mu > 0.0 ? std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0) : 0.0;

    // Corrector in the scaled space: Lambda P + P Lambda = 2 RHS. Without
    // strict complementarity the second-order term can block the step; the
    // plain centering direction is then tried as well.
    auto corrector = [&](bool second_order) {
      std::vector<Matrix> r_cor(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        const auto k = f0[j].rows();
        Matrix rhs = Matrix::Zero(k, k);
        if (second_order) {
          const Matrix ds_hat = sc[j].g_inv * aff.ds[j] * sc[j].g_inv.transpose();
          const Matrix dz_hat = sc[j].g.transpose() * aff.dz[j] * sc[j].g;
          rhs = -0.5 * (ds_hat * dz_hat + dz_hat * ds_hat);
        }
        rhs.diagonal().array() += sigma * mu;
        rhs.diagonal() -= sc[j].lambda.cwiseAbs2();
        Matrix pm(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
          for (Eigen::Index b = 0; b < k; ++b)
            pm(a, b) = 2.0 * rhs(a, b) / (sc[j].lambda[a] + sc[j].lambda[b]);
        r_cor[j] = symmetrized(sc[j].g_inv.transpose() * pm * sc[j].g_inv);
      }
      return newton(r_cor);
    };
    const double fraction = std::min(opt.step_fraction, 0.9 + 0.09 * std::min(ap_aff, ad_aff));
    // Applies the dual fix unless it costs more than half the dual step.
    auto with_fix = [&](Direction dir) {
      Direction fixed = dir;
      for (std::size_t j = 0; j < nb; ++j) fixed.dz[j] += dir.dz_fix[j];
      const double plain = step_lengths(dir, fraction).second;
      return step_lengths(fixed, fraction).second >= 0.5 * plain ? fixed : dir;
    };
    Direction d = with_fix(corrector(true));
    if (!kkt_ok) return fail("Newton system is singular");
    auto [ap, ad] = step_lengths(d, fraction);
    if (std::min(ap, ad) < 0.5 * std::min(ap_aff, ad_aff)) {
      Direction alt = with_fix(corrector(false));
      if (!kkt_ok) return fail("Newton system is singular");
      const auto [ap2, ad2] = step_lengths(alt, fraction);
      if (std::min(ap2, ad2) > std::min(ap, ad)) {
        d = std::move(alt);
        ap = ap2;
        ad = ad2;
      }
    }

    it.v += ap * d.dv;
    if (p) it.y += ad * d.dy;
    for (std::size_t j = 0; j < nb; ++j) {
      it.s[j] = symmetrized(it.s[j] + ap * d.ds[j]);
      it.z[j] = symmetrized(it.z[j] + ad * d.dz[j]);
    }
    if (opt.record_trace) {
      sol.trace.push_back({pobj, dobj, comp, pinf, dinf, ap, ad});
    }
  }
}

Vector symmetric_eigenvalues(const Matrix& m, double tol) {
  require(m.rows() == m.cols(), "eigenvalues: matrix must be square");
  require(m.allFinite(), "eigenvalues: non-finite entries");
  const double scale = m.cwiseAbs().maxCoeff();
  require(symmetry_defect(m) <= 1e-12 * (1.0 + scale), "eigenvalues: matrix is not symmetric");
  Matrix a = symmetrized(m);
  const auto k = a.rows();
  const double target = tol * std::max(a.norm(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i + 1; j < k; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(2.0 * off) <= target) break;
    for (Eigen::Index p = 0; p < k; ++p)
      for (Eigen::Index q = p + 1; q < k; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (Eigen::Index r = 0; r < k; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = cs * arp - sn * arq;
          a(r, q) = sn * arp + cs * arq;
        }
        for (Eigen::Index r = 0; r < k; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = cs * apr - sn * aqr;
          a(q, r) = sn * apr + cs * aqr;
        }
      }
  }
  Vector ev = a.diagonal();
  std::sort(ev.begin(), ev.end());
  return ev;
}

double eig_floor(const Matrix& m) {
  require(m.rows() > 0, "eig_floor: empty matrix");
  return symmetric_eigenvalues(m)[0];
}

// ---------------------------------------------------------------------------
// Text dump
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void upper_triplets(std::ostringstream& body, std::size_t& count, long var, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = r; c < m.cols(); ++c)
      if (m(r, c) != 0.0) {
        body << var << ' ' << r << ' ' << c << ' ' << fmt(m(r, c)) << '\n';
        ++count;
      }
}

}  // namespace

std::string dump(const SdpProblem& problem) {
  validate(problem);
  std::ostringstream out;
  out << "eccbf-sdp 1\n";
  out << "variables " << problem.num_vars << '\n';
  out << "blocks " << problem.blocks.size();
  for (const auto& b : problem.blocks) out << ' ' << b.size();
  out << '\n';

  std::ostringstream body;
  std::size_t nnz = 0;
  for (Eigen::Index r = 0; r < problem.eq_matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < problem.eq_matrix.cols(); ++c)
      if (problem.eq_matrix(r, c) != 0.0) {
        body << r << ' ' << c << ' ' << fmt(problem.eq_matrix(r, c)) << '\n';
        ++nnz;
      }
  out << "equalities " << problem.eq_matrix.rows() << ' ' << nnz << '\n' << body.str();

  body.str("");
  nnz = 0;
  for (Eigen::Index r = 0; r < problem.eq_rhs.size(); ++r)
    if (problem.eq_rhs[r] != 0.0) {
      body << r << ' ' << fmt(problem.eq_rhs[r]) << '\n';
      ++nnz;
    }
  out << "rhs " << nnz << '\n' << body.str();

  body.str("");
  nnz = 0;
  for (Eigen::Index i = 0; i < problem.objective.size(); ++i)
    if (problem.objective[i] != 0.0) {
      body << i << ' ' << fmt(problem.objective[i]) << '\n';
      ++nnz;
    }
  out << "objective " << nnz << '\n' << body.str();

  for (std::size_t j = 0; j < problem.blocks.size(); ++j) {
    body.str("");
    nnz = 0;
    upper_triplets(body, nnz, -1, problem.blocks[j].constant);
    for (const auto& t : problem.blocks[j].terms) upper_triplets(body, nnz, static_cast<long>(t.var), t.coefficient);
    out << "block " << j << ' ' << nnz << '\n' << body.str();
  }
  out << "end\n";
  return out.str();
}

SdpProblem parse_dump(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto fail = [](const std::string& what) -> void { throw ConfigError("sdp dump: " + what); };
  auto expect = [&](const char* keyword) {
    std::string word;
    if (!(in >> word) || word != keyword) fail(std::string("expected '") + keyword + "'");
  };
  auto read_count = [&](const char* what) {
    long long v;
    if (!(in >> v) || v < 0) fail(std::string("bad ") + what);
    return static_cast<std::size_t>(v);
  };

  expect("eccbf-sdp");
  if (read_count("version") != 1) fail("unsupported version");
  expect("variables");
  SdpProblem p;
  p.num_vars = read_count("variable count");
  const auto n = static_cast<Eigen::Index>(p.num_vars);
  expect("blocks");
  const std::size_t nb = read_count("block count");
  std::vector<Eigen::Index> sizes(nb);
  for (auto& s : sizes) s = static_cast<Eigen::Index>(read_count("block size"));

  expect("equalities");
  const auto rows = static_cast<Eigen::Index>(read_count("equality rows"));
  std::size_t nnz = read_count("equality nnz");
  p.eq_matrix = Matrix::Zero(rows, n);
  p.eq_rhs = Vector::Zero(rows);
  for (std::size_t k = 0; k < nnz; ++k) {
    long long r, c;
    double v;
    if (!(in >> r >> c >> v) || r < 0 || r >= rows || c < 0 || c >= n) fail("bad equality entry");
    p.eq_matrix(r, c) = v;
  }
  expect("rhs");
  nnz = read_count("rhs nnz");
  for (std::size_t k = 0; k < nnz; ++k) {
    long long r;
    double v;
    if (!(in >> r >> v) || r < 0 || r >= rows) fail("bad rhs entry");
    p.eq_rhs[r] = v;
  }
  expect("objective");
  nnz = read_count("objective nnz");
  p.objective = Vector::Zero(n);
  for (std::size_t k = 0; k < nnz; ++k) {
    long long i;
    double v;
    if (!(in >> i >> v) || i < 0 || i >= n) fail("bad objective entry");
    p.objective[i] = v;
  }
  for (std::size_t j = 0; j < nb; ++j) {
    expect("block");
    if (read_count("block index") != j) fail("blocks out of order");
    nnz = read_count("block nnz");
    const auto k = sizes[j];
    LmiBlock blk{Matrix::Zero(k, k), {}};
    std::map<long long, Matrix> by_var;
    for (std::size_t e = 0; e < nnz; ++e) {
      long long var, r, c;
      double v;
      if (!(in >> var >> r >> c >> v) || var < -1 || var >= n || r < 0 || c < r || c >= k)
        fail("bad block entry");
      Matrix& target = var < 0 ? blk.constant : by_var.try_emplace(var, Matrix::Zero(k, k)).first->second;
      target(r, c) = v;
      target(c, r) = v;
    }
    for (auto& [var, m] : by_var) blk.terms.push_back({static_cast<std::size_t>(var), std::move(m)});
    p.blocks.push_back(std::move(blk));
  }
  expect("end");
  validate(p);
  return p;
}

}  // namespace eccbf::sdp
