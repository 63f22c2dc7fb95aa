#include "eccbf/sos.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace eccbf::sos {

namespace {

constexpr double kCoefficientTolerance = 1e-6;
constexpr double kEigenvalueFloor = -1e-7;

Exponents add_exponents(const Exponents& a, const Exponents& b) {
  Exponents r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

void require_linear(const ClassKFunction& alpha) {
  if (alpha.kind != ClassKFunction::Kind::Linear)
    throw UnsupportedOperation("the SOS filter admits only linear class-K functions");
}

// Symmetric matrix from upper-triangular entries stored row-major from offset.
Matrix unpack_symmetric(const Vector& v, std::size_t offset, std::size_t size) {
  const auto k = static_cast<Eigen::Index>(size);
  Matrix m(k, k);
  std::size_t idx = offset;
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a; b < k; ++b) {
      m(a, b) = v[static_cast<Eigen::Index>(idx++)];
      m(b, a) = m(a, b);
    }
  return m;
}

// The symmetric basis matrix for upper entry (a, b).
Matrix entry_basis(std::size_t size, std::size_t a, std::size_t b) {
  const auto k = static_cast<Eigen::Index>(size);
  Matrix m = Matrix::Zero(k, k);
  m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
  m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = 1.0;
  return m;
}

}  // namespace

int AffinePoly::degree() const {
  int d = constant.degree();
  for (const auto& c : channels) d = std::max(d, c.degree());
  return d;
}

MultiPoly AffinePoly::at(const Vector& u) const {
  require(static_cast<std::size_t>(u.size()) == channels.size(), "affine polynomial: input dimension mismatch");
  MultiPoly p = constant;
  for (std::size_t i = 0; i < channels.size(); ++i) p += u[static_cast<Eigen::Index>(i)] * channels[i];
  return p;
}

AffinePoly build_constraint_poly(const ExtentFunction& extent, const SafeFunction& h, const ClassKFunction& alpha1,
                                 const ClassKFunction& alpha2, const ControlAffineSystem& sys, const Vector& x) {
  require_linear(alpha1);
  require_linear(alpha2);
  require(extent.state_dimension() == sys.state_dimension(), "extent and system state dimensions differ");
  require(h.dimension() == extent.point_dimension(), "safe function and extent point dimensions differ");
  const auto e_poly = extent.polynomial_in_y(x);
  const auto grads = extent.gradient_x_polynomials(x);
  const auto h_poly = h.as_polynomial();
  if (!e_poly || !grads) throw UnsupportedOperation("extent is not polynomial in y");
  if (!h_poly) throw UnsupportedOperation("safe function is not polynomial");

  const Vector f = sys.drift(x);
  const Matrix g = sys.actuation(x);
  AffinePoly out{alpha1.gain * *e_poly + alpha2.gain * *h_poly, {}};
  for (std::size_t k = 0; k < grads->size(); ++k) out.constant += f[static_cast<Eigen::Index>(k)] * (*grads)[k];
  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    MultiPoly channel(extent.point_dimension());
    for (std::size_t k = 0; k < grads->size(); ++k) channel += g(static_cast<Eigen::Index>(k), i) * (*grads)[k];
    out.channels.push_back(std::move(channel));
  }
  return out;
}

GramBasis GramBasis::up_to(std::size_t num_vars, int degree) {
  require(degree >= 0, "Gram basis degree must be nonnegative");
  return {monomials_up_to(num_vars, degree)};
}

MultiPoly GramBasis::form(const Matrix& q) const {
  require(q.rows() == static_cast<Eigen::Index>(size()) && q.cols() == q.rows(), "Gram matrix size mismatch");
  MultiPoly p(monomials.empty() ? 0 : monomials.front().size());
  for (std::size_t a = 0; a < size(); ++a)
    for (std::size_t b = 0; b < size(); ++b) {
      const double c = q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (c != 0.0) p.add_term(add_exponents(monomials[a], monomials[b]), c);
    }
  return p;
}

int default_multiplier_degree(int poly_degree, int h_degree) {
  const int d = poly_degree - std::max(h_degree, 0);
  return d <= 0 ? 0 : d - d % 2;
}

Matrix SosProgram::gram_from(const Vector& v) const { return unpack_symmetric(v, q_offset, main.size()); }

Matrix SosProgram::multiplier_gram_from(const Vector& v) const {
  return unpack_symmetric(v, s_offset, multiplier.size());
}

SosProgram assemble_sos_program(const AffinePoly& poly, const MultiPoly& h, int deg_s, const Vector& k,
                                double input_bound) {
  if (deg_s < 0 || deg_s % 2 != 0)
    throw ConfigError("multiplier degree must be even and nonnegative, got " + std::to_string(deg_s));
  require(h.num_vars() == poly.num_vars(), "safe polynomial and constraint polynomial variable counts differ");
  const std::size_t m = poly.input_dimension();
  require(m > 0, "SOS program needs at least one input");
  require(static_cast<std::size_t>(k.size()) == m, "nominal input dimension mismatch");
  require(k.allFinite(), "nominal input must be finite");
  require(input_bound > 0.0, "input bound must be positive");
  const std::size_t nv = poly.num_vars();

  const int full = std::max(poly.degree(), deg_s + std::max(h.degree(), 0));
  const int dq = (std::max(full, 0) + 1) / 2;

  SosProgram prog;
  prog.poly = poly;
  prog.h = h;
  prog.main = GramBasis::up_to(nv, dq);
  prog.multiplier = GramBasis::up_to(nv, deg_s / 2);
  prog.rows = monomials_up_to(nv, 2 * dq);
  prog.delta_index = m;
  prog.q_offset = m + 1;
  prog.s_offset = prog.q_offset + prog.main.entry_count();
  const std::size_t n = prog.s_offset + prog.multiplier.entry_count();

  std::map<Exponents, std::size_t, GradedLexLess> row_of;
  for (std::size_t r = 0; r < prog.rows.size(); ++r) row_of.emplace(prog.rows[r], r);
  auto row = [&](const Exponents& e) {
    const auto it = row_of.find(e);
    require(it != row_of.end(), "monomial outside the equality basis");
    return static_cast<Eigen::Index>(it->second);
  };

  auto& sdp = prog.sdp;
  sdp.num_vars = n;
  sdp.objective = Vector::Zero(static_cast<Eigen::Index>(n));
  sdp.objective[static_cast<Eigen::Index>(prog.delta_index)] = 1.0;
  sdp.eq_matrix = Matrix::Zero(static_cast<Eigen::Index>(prog.rows.size()), static_cast<Eigen::Index>(n));
  sdp.eq_rhs = Vector::Zero(static_cast<Eigen::Index>(prog.rows.size()));

  // sum_i u_i p_i - s h - <Q, B_mu> = -p_0, one row per monomial mu.
  for (const auto& [e, c] : poly.constant.terms()) sdp.eq_rhs[row(e)] -= c;
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& [e, c] : poly.channels[i].terms()) sdp.eq_matrix(row(e), static_cast<Eigen::Index>(i)) += c;

  sdp::LmiBlock q_block{Matrix::Zero(static_cast<Eigen::Index>(prog.main.size()),
                                     static_cast<Eigen::Index>(prog.main.size())),
                        {}};
  std::size_t var = prog.q_offset;
  for (std::size_t a = 0; a < prog.main.size(); ++a)
    for (std::size_t b = a; b < prog.main.size(); ++b, ++var) {
      const double w = a == b ? 1.0 : 2.0;
      sdp.eq_matrix(row(add_exponents(prog.main.monomials[a], prog.main.monomials[b])), static_cast<Eigen::Index>(var)) -= w;
      q_block.terms.push_back({var, entry_basis(prog.main.size(), a, b)});
    }
  sdp::LmiBlock s_block{Matrix::Zero(static_cast<Eigen::Index>(prog.multiplier.size()),
                                     static_cast<Eigen::Index>(prog.multiplier.size())),
                        {}};
  for (std::size_t a = 0; a < prog.multiplier.size(); ++a)
    for (std::size_t b = a; b < prog.multiplier.size(); ++b, ++var) {
      const double w = a == b ? 1.0 : 2.0;
      const Exponents zz = add_exponents(prog.multiplier.monomials[a], prog.multiplier.monomials[b]);
      for (const auto& [e, c] : h.terms())
        sdp.eq_matrix(row(add_exponents(zz, e)), static_cast<Eigen::Index>(var)) -= w * c;
      s_block.terms.push_back({var, entry_basis(prog.multiplier.size(), a, b)});
    }

  const auto mi = static_cast<Eigen::Index>(m);
  // [[I, u], [u^T, delta + 2 k^T u - k^T k]]
  sdp::LmiBlock schur{Matrix::Zero(mi + 1, mi + 1), {}};
  schur.constant.topLeftCorner(mi, mi).setIdentity();
  schur.constant(mi, mi) = -k.squaredNorm();
  for (Eigen::Index i = 0; i < mi; ++i) {
    Matrix t = Matrix::Zero(mi + 1, mi + 1);
    t(i, mi) = t(mi, i) = 1.0;
    t(mi, mi) = 2.0 * k[i];
    schur.terms.push_back({static_cast<std::size_t>(i), t});
  }
  Matrix td = Matrix::Zero(mi + 1, mi + 1);
  td(mi, mi) = 1.0;
  schur.terms.push_back({prog.delta_index, td});

  // [[M I, u], [u^T, M]]: |u| <= M.
  sdp::LmiBlock bound{input_bound * Matrix::Identity(mi + 1, mi + 1), {}};
  for (Eigen::Index i = 0; i < mi; ++i) {
    Matrix t = Matrix::Zero(mi + 1, mi + 1);
    t(i, mi) = t(mi, i) = 1.0;
    bound.terms.push_back({static_cast<std::size_t>(i), t});
  }

  sdp.blocks = {std::move(q_block), std::move(s_block), std::move(schur), std::move(bound)};
  Vector start = Vector::Zero(static_cast<Eigen::Index>(n));
  start[static_cast<Eigen::Index>(prog.delta_index)] = k.squaredNorm() + 1.0;
  sdp.initial_point = start;
  return prog;
}

Certificate check_certificate(const SosProgram& program, const Vector& v) {
  require(v.size() == static_cast<Eigen::Index>(program.sdp.num_vars), "certificate: variable count mismatch");
  Certificate c;
  c.q = program.gram_from(v);
  c.s = program.multiplier_gram_from(v);
  c.multiplier = program.multiplier.form(c.s);
  const Vector u = v.head(static_cast<Eigen::Index>(program.input_dimension()));
  c.residual = program.poly.at(u) - c.multiplier * program.h - program.main.form(c.q);
  c.coefficient_error = c.residual.max_abs_coefficient();
  c.q_min_eigenvalue = sdp::eig_floor(c.q);
  c.s_min_eigenvalue = sdp::eig_floor(c.s);
  c.valid = c.coefficient_error <= kCoefficientTolerance && c.q_min_eigenvalue >= kEigenvalueFloor &&
            c.s_min_eigenvalue >= kEigenvalueFloor;
  return c;
}

SosResult solve_sos_program(const SosProgram& program, const sdp::SdpOptions& options) {
  SosResult r;
  r.sdp = sdp::solve_sdp(program.sdp, options);
  const auto m = static_cast<Eigen::Index>(program.input_dimension());
  switch (r.sdp.status) {
    case sdp::SdpStatus::Optimal: {
      r.certificate = check_certificate(program, r.sdp.v);
      r.u = r.sdp.v.head(m);
      r.delta = r.sdp.v[static_cast<Eigen::Index>(program.delta_index)];
      r.status = r.certificate.valid ? StepStatus::Ok : StepStatus::CertificateRejected;
      break;
    }
    case sdp::SdpStatus::Infeasible:
      r.status = StepStatus::Infeasible;
      break;
    case sdp::SdpStatus::Unbounded:
    case sdp::SdpStatus::MaxIterations:
      r.status = StepStatus::MaxIterations;
      break;
  }
  if (r.status != StepStatus::Ok) r.u = Vector::Zero(m);
  return r;
}

SosResult sos_filter_input(const ExtentFunction& extent, const SafeFunction& h, const ClassKFunction& alpha1,
                           const ClassKFunction& alpha2, const ControlAffineSystem& sys, const Vector& x,
                           const Vector& k, std::optional<int> deg_s, const sdp::SdpOptions& options) {
  const AffinePoly poly = build_constraint_poly(extent, h, alpha1, alpha2, sys, x);
  const MultiPoly h_poly = *h.as_polynomial();
  const int ds = deg_s ? *deg_s : default_multiplier_degree(poly.degree(), h_poly.degree());
  SosResult r = solve_sos_program(assemble_sos_program(poly, h_poly, ds, k, sys.input_bound()), options);
  if (r.status == StepStatus::Ok) {
    // The bound block holds |u| <= M only to solver accuracy.
    const double excess = r.u.norm() - sys.input_bound();
    if (excess > 1e-6) r.status = StepStatus::CertificateRejected;
    else if (excess > 0.0) r.u = clip_norm(r.u, sys.input_bound());
  }
  return r;
}

GramResult find_gram(const MultiPoly& p, const sdp::SdpOptions& options) {
  const int d = std::max(p.degree(), 0);
  const GramBasis basis = GramBasis::up_to(p.num_vars(), (d + 1) / 2);
  const std::vector<Exponents> rows = monomials_up_to(p.num_vars(), 2 * ((d + 1) / 2));
  std::map<Exponents, std::size_t, GradedLexLess> row_of;
  for (std::size_t r = 0; r < rows.size(); ++r) row_of.emplace(rows[r], r);

  sdp::SdpProblem prob;
  prob.num_vars = basis.entry_count();
  const auto n = static_cast<Eigen::Index>(prob.num_vars);
  prob.objective = Vector::Zero(n);
  prob.eq_matrix = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), n);
  prob.eq_rhs = Vector::Zero(static_cast<Eigen::Index>(rows.size()));
  for (const auto& [e, c] : p.terms()) {
    const auto it = row_of.find(e);
    require(it != row_of.end(), "monomial outside the Gram basis");
    prob.eq_rhs[static_cast<Eigen::Index>(it->second)] = c;
  }
  sdp::LmiBlock block{Matrix::Zero(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size())),
                      {}};
  std::size_t var = 0;
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = a; b < basis.size(); ++b, ++var) {
      const auto r = row_of.at(add_exponents(basis.monomials[a], basis.monomials[b]));
      prob.eq_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(var)) = a == b ? 1.0 : 2.0;
      block.terms.push_back({var, entry_basis(basis.size(), a, b)});
    }
  prob.blocks.push_back(std::move(block));

  GramResult out;
  const sdp::SdpSolution sol = sdp::solve_sdp(prob, options);
  out.status = sol.status;
  if (sol.status == sdp::SdpStatus::Optimal) {
    out.q = unpack_symmetric(sol.v, 0, basis.size());
    out.coefficient_error = (p - basis.form(out.q)).max_abs_coefficient();
    out.min_eigenvalue = sdp::eig_floor(out.q);
    out.certified = out.coefficient_error <= kCoefficientTolerance && out.min_eigenvalue >= kEigenvalueFloor;
  }
  return out;
}

SosFilter::SosFilter(ControlAffineSystem sys, ExtentFunction extent, SafeFunction h, ClassKFunction alpha1,
                     ClassKFunction alpha2, std::optional<int> deg_s, sdp::SdpOptions options)
    : sys_(std::move(sys)),
      extent_(std::move(extent)),
      h_(std::move(h)),
      alpha1_(alpha1),
      alpha2_(alpha2),
      deg_s_(deg_s),
      options_(options) {
  require_linear(alpha1_);
  require_linear(alpha2_);
  if (!h_.as_polynomial()) throw UnsupportedOperation("the SOS filter needs a polynomial safe function");
  if (std::holds_alternative<CustomExtent>(extent_.kind()))
    throw UnsupportedOperation("the SOS filter needs a polynomial extent");
  if (deg_s_ && (*deg_s_ < 0 || *deg_s_ % 2 != 0))
    throw ConfigError("multiplier degree must be even and nonnegative");
}

FilterOutput SosFilter::apply(const Vector& x, const Vector& k) const {
  const SosResult r = sos_filter_input(extent_, h_, alpha1_, alpha2_, sys_, x, k, deg_s_, options_);
  FilterOutput out;
  out.status = r.status;
  out.u = r.u;
  out.iterations = r.sdp.iterations;
  // The epigraph variable is accurate to the gap tolerance, so u matches an
  // admissible k only to about its square root.
  const double resolution = std::max(1e-6, 10.0 * std::sqrt(options_.gap_tol));
  out.active = r.status == StepStatus::Ok && (r.u - k).norm() > resolution;
  return out;
}

}  // namespace eccbf::sos
