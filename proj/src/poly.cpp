#include "eccbf/poly.hpp"

#include "eccbf/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace eccbf {

int total_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

bool GradedLexLess::operator()(const Exponents& a, const Exponents& b) const {
  const int da = total_degree(a);
  const int db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

MultiPoly::MultiPoly(std::size_t num_vars) : num_vars_(num_vars) {
  require(num_vars > 0, "MultiPoly needs at least one variable");
}

MultiPoly MultiPoly::constant(std::size_t num_vars, double value) {
  MultiPoly p(num_vars);
  p.add_term(Exponents(num_vars, 0), value);
  return p;
}

MultiPoly MultiPoly::variable(std::size_t num_vars, std::size_t index) {
  require(index < num_vars, "variable index out of range");
  Exponents e(num_vars, 0);
  e[index] = 1;
  return monomial(e);
}

MultiPoly MultiPoly::monomial(const Exponents& exponents, double coefficient) {
  MultiPoly p(exponents.size());
  p.add_term(exponents, coefficient);
  return p;
}

int MultiPoly::degree() const {
  if (terms_.empty()) return -1;
  // grlex order puts the highest degree last
  return total_degree(terms_.rbegin()->first);
}

double MultiPoly::coefficient(const Exponents& exponents) const {
  const auto it = terms_.find(exponents);
  return it == terms_.end() ? 0.0 : it->second;
}

void MultiPoly::add_term(const Exponents& exponents, double coefficient) {
  require(exponents.size() == num_vars_, "monomial variable count mismatch");
  for (int k : exponents) require(k >= 0, "negative exponent");
  if (coefficient == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(exponents, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double MultiPoly::evaluate(std::span<const double> y) const {
  require(y.size() == num_vars_, "evaluation point has wrong dimension");
  const int deg = std::max(degree(), 0);
  // powers[v][k] = y_v^k
  std::vector<std::vector<double>> powers(num_vars_, std::vector<double>(deg + 1, 1.0));
  for (std::size_t v = 0; v < num_vars_; ++v)
    for (int k = 1; k <= deg; ++k) powers[v][k] = powers[v][k - 1] * y[v];
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = c;
    for (std::size_t v = 0; v < num_vars_; ++v) term *= powers[v][e[v]];
    sum += term;
  }
  return sum;
}

MultiPoly MultiPoly::derivative(std::size_t var) const {
  require(var < num_vars_, "derivative variable out of range");
  MultiPoly d(num_vars_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponents de = e;
    de[var] -= 1;
    d.add_term(de, c * e[var]);
  }
  return d;
}

MultiPoly MultiPoly::pow(int exponent) const {
  require(exponent >= 0, "negative polynomial power");
  MultiPoly result = constant(num_vars_, 1.0);
  MultiPoly base = *this;
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

MultiPoly MultiPoly::pruned(double tol) const {
  MultiPoly p(num_vars_);
  for (const auto& [e, c] : terms_)
    if (std::abs(c) > tol) p.terms_.emplace(e, c);
  return p;
}

double MultiPoly::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void MultiPoly::check_compatible(const MultiPoly& other) const {
  require(num_vars_ == other.num_vars_, "polynomial variable count mismatch");
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& other) {
  check_compatible(other);
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

MultiPoly& MultiPoly::operator-=(const MultiPoly& other) {
  check_compatible(other);
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

MultiPoly& MultiPoly::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
  a.check_compatible(b);
  MultiPoly p(a.num_vars_);
  Exponents e(a.num_vars_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t v = 0; v < e.size(); ++v) e[v] = ea[v] + eb[v];
      p.add_term(e, ca * cb);
    }
  return p;
}

std::string MultiPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) out << " + ";
    first = false;
    out << c;
    for (std::size_t v = 0; v < e.size(); ++v)
      if (e[v] > 0) out << "*y" << (v + 1) << (e[v] > 1 ? "^" + std::to_string(e[v]) : "");
  }
  return out.str();
}

namespace {

void fill_degree(std::size_t var, int remaining, Exponents& current, std::vector<Exponents>& out) {
  if (var + 1 == current.size()) {
    current[var] = remaining;
    out.push_back(current);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    current[var] = k;
    fill_degree(var + 1, remaining - k, current, out);
  }
}

}  // namespace

std::vector<Exponents> monomials_up_to(std::size_t num_vars, int max_degree) {
  require(num_vars > 0, "monomial basis needs at least one variable");
  std::vector<Exponents> out;
  Exponents current(num_vars, 0);
  for (int d = 0; d <= max_degree; ++d) fill_degree(0, d, current, out);
  return out;
}

}  // namespace eccbf
