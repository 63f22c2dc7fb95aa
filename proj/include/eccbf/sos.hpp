#ifndef ECCBF_SOS_HPP
#define ECCBF_SOS_HPP

#include "eccbf/common.hpp"
#include "eccbf/dynamics.hpp"
#include "eccbf/geometry.hpp"
#include "eccbf/poly.hpp"
#include "eccbf/safety_filters.hpp"
#include "eccbf/sdp.hpp"

#include <optional>
#include <vector>

namespace eccbf::sos {

/// constant(y) + sum_i u_i channels[i](y).
struct AffinePoly {
  MultiPoly constant;
  std::vector<MultiPoly> channels;

  std::size_t num_vars() const { return constant.num_vars(); }
  std::size_t input_dimension() const { return channels.size(); }
  int degree() const;
  MultiPoly at(const Vector& u) const;
};

/// dE/dx(x, y) (f + g u) + alpha1(E(x, y)) + alpha2(h(y)) as a polynomial in y
/// with coefficients affine in u. Needs polynomial E and h and linear class-K
/// functions; otherwise throws UnsupportedOperation.
AffinePoly build_constraint_poly(const ExtentFunction& extent, const SafeFunction& h,
                                 const ClassKFunction& alpha1, const ClassKFunction& alpha2,
                                 const ControlAffineSystem& sys, const Vector& x);

/// Monomials z(y) of a Gram form z^T Q z, graded-lex ordered.
struct GramBasis {
  std::vector<Exponents> monomials;

  static GramBasis up_to(std::size_t num_vars, int degree);
  std::size_t size() const { return monomials.size(); }
  /// Upper-triangular entries (a <= b), row-major.
  std::size_t entry_count() const { return size() * (size() + 1) / 2; }
  /// z^T Q z for symmetric Q.
  MultiPoly form(const Matrix& q) const;
};

/// deg(p) - deg(h) rounded down to even, at least 0.
int default_multiplier_degree(int poly_degree, int h_degree);

/// SDP for: minimize delta over (u, delta, Q, S) with
///   p_u - s h = z^T Q z,  s = zs^T S zs,  Q, S PSD,
///   [[I, u], [u^T, delta + 2 k^T u - k^T k]] PSD,  [[M I, u], [u^T, M]] PSD.
/// Variable layout: u (m), delta, Q upper entries, S upper entries. One
/// equality row per monomial of degree <= 2 * deg(z), graded-lex ordered.
struct SosProgram {
  sdp::SdpProblem sdp;
  AffinePoly poly;
  MultiPoly h;
  GramBasis main;
  GramBasis multiplier;
  std::vector<Exponents> rows;
  std::size_t delta_index = 0;
  std::size_t q_offset = 0;
  std::size_t s_offset = 0;

  std::size_t input_dimension() const { return poly.input_dimension(); }
  Matrix gram_from(const Vector& v) const;
  Matrix multiplier_gram_from(const Vector& v) const;
};

/// Throws ConfigError when deg_s is odd or negative.
SosProgram assemble_sos_program(const AffinePoly& poly, const MultiPoly& h, int deg_s, const Vector& k,
                                double input_bound);

struct Certificate {
  Matrix q;
  Matrix s;
  MultiPoly multiplier;          // s(y)
  MultiPoly residual;            // p_u - s h - z^T Q z
  double coefficient_error = 0;  // max |coefficient| of residual
  double q_min_eigenvalue = 0;
  double s_min_eigenvalue = 0;
  bool valid = false;            // coefficient_error <= 1e-6, eigenvalues >= -1e-7
};

Certificate check_certificate(const SosProgram& program, const Vector& v);

struct SosResult {
  StepStatus status = StepStatus::Infeasible;
  Vector u;
  double delta = 0.0;
  sdp::SdpSolution sdp;
  Certificate certificate;
};

SosResult solve_sos_program(const SosProgram& program, const sdp::SdpOptions& options = {});

/// argmin |u - k|^2 over inputs with an SOS certificate and |u| <= M.
/// deg_s defaults to default_multiplier_degree.
SosResult sos_filter_input(const ExtentFunction& extent, const SafeFunction& h, const ClassKFunction& alpha1,
                           const ClassKFunction& alpha2, const ControlAffineSystem& sys, const Vector& x,
                           const Vector& k, std::optional<int> deg_s = std::nullopt,
                           const sdp::SdpOptions& options = {});

struct GramResult {
  sdp::SdpStatus status = sdp::SdpStatus::MaxIterations;
  Matrix q;
  double coefficient_error = 0.0;
  double min_eigenvalue = 0.0;
  bool certified = false;
};

/// Searches for Q PSD with p = z^T Q z.
GramResult find_gram(const MultiPoly& p, const sdp::SdpOptions& options = {});

class SosFilter final : public SafetyFilter {
 public:
  SosFilter(ControlAffineSystem sys, ExtentFunction extent, SafeFunction h, ClassKFunction alpha1,
            ClassKFunction alpha2, std::optional<int> deg_s = std::nullopt, sdp::SdpOptions options = {});
  std::string name() const override { return "sos"; }
  FilterOutput apply(const Vector& x, const Vector& k) const override;

 private:
  ControlAffineSystem sys_;
  ExtentFunction extent_;
  SafeFunction h_;
  ClassKFunction alpha1_;
  ClassKFunction alpha2_;
  std::optional<int> deg_s_;
  sdp::SdpOptions options_;
};

}  // namespace eccbf::sos

#endif  // ECCBF_SOS_HPP
