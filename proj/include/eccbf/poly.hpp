#ifndef ECCBF_POLY_HPP
#define ECCBF_POLY_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace eccbf {

using Exponents = std::vector<int>;

int total_degree(const Exponents& e);

/// Graded lexicographic order: lower total degree first; within a degree,
/// larger exponent of the first variable first (y1^2, y1*y2, y2^2).
struct GradedLexLess {
  bool operator()(const Exponents& a, const Exponents& b) const;
};

/// Sparse multivariate polynomial with real coefficients. Exactly-zero
/// coefficients are never stored.
class MultiPoly {
 public:
  using TermMap = std::map<Exponents, double, GradedLexLess>;

  explicit MultiPoly(std::size_t num_vars = 2);

  static MultiPoly constant(std::size_t num_vars, double value);
  static MultiPoly variable(std::size_t num_vars, std::size_t index);
  static MultiPoly monomial(const Exponents& exponents, double coefficient = 1.0);

  std::size_t num_vars() const { return num_vars_; }
  /// Maximum total degree; -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }

  double coefficient(const Exponents& exponents) const;
  void add_term(const Exponents& exponents, double coefficient);

  double evaluate(std::span<const double> y) const;
  MultiPoly derivative(std::size_t var) const;
  MultiPoly pow(int exponent) const;
  /// Drops terms with |coefficient| <= tol.
  MultiPoly pruned(double tol) const;
  double max_abs_coefficient() const;

  MultiPoly& operator+=(const MultiPoly& other);
  MultiPoly& operator-=(const MultiPoly& other);
  MultiPoly& operator*=(double s);

  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
  friend MultiPoly operator*(MultiPoly a, double s) { return a *= s; }
  friend MultiPoly operator*(double s, MultiPoly a) { return a *= s; }
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b);
  MultiPoly operator-() const { return *this * -1.0; }

  bool operator==(const MultiPoly& other) const = default;

  std::string to_string() const;

 private:
  void check_compatible(const MultiPoly& other) const;

  std::size_t num_vars_;
  TermMap terms_;
};

/// All monomials of total degree <= max_degree in graded-lex order.
std::vector<Exponents> monomials_up_to(std::size_t num_vars, int max_degree);

}  // namespace eccbf

#endif  // ECCBF_POLY_HPP
