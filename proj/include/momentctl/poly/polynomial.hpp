#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "momentctl/poly/multi_index.hpp"

namespace momentctl::poly {

/// Sparse real polynomial in `num_vars` variables, terms kept in graded-lex
/// order with no stored zero coefficients.
class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(int num_vars) : num_vars_(num_vars) {}

  static Polynomial constant(int num_vars, double c);
  static Polynomial monomial(const MultiIndex& alpha, double c = 1.0);
  static Polynomial variable(int num_vars, int i);

  int num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  /// Max |alpha| over stored terms; 0 for the zero polynomial.
  int degree() const;
  /// Max exponent sum restricted to variables [first, first+count).
  int degree_in(int first, int count) const;

  double coefficient(const MultiIndex& alpha) const;
  /// Adds c to the coefficient of x^alpha, dropping the term if it cancels.
  void add_term(const MultiIndex& alpha, double c);

  /// Evaluates at `point` (size num_vars), summing in graded-lex order.
  double evaluate(std::span<const double> point) const;

  Polynomial operator+(const Polynomial& b) const;
  Polynomial operator-(const Polynomial& b) const;
  Polynomial operator*(const Polynomial& b) const;
  Polynomial operator-() const { return scaled(-1.0); }
  Polynomial scaled(double c) const;

  /// d/dx_i, exact.
  Polynomial partial_derivative(int i) const;

  /// Same polynomial viewed in num_vars + extra variables (new exponents 0).
  Polynomial lifted(int extra) const;

  /// Text form `c*x1^a1*u1^b1 + ...` using the given variable names.
  std::string to_string(std::span<const std::string> names) const;

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void require_same_vars(const Polynomial& b, const char* op) const;

  int num_vars_ = 0;
  TermMap terms_;
};

inline Polynomial operator*(double c, const Polynomial& p) { return p.scaled(c); }

/// Dynamics f = (f_1, ..., f_n); all components share num_vars.
class PolynomialVector {
 public:
  PolynomialVector() = default;
  explicit PolynomialVector(std::vector<Polynomial> components);

  std::size_t size() const { return components_.size(); }
  const Polynomial& operator[](std::size_t k) const { return components_[k]; }
  const std::vector<Polynomial>& components() const { return components_; }
  int num_vars() const { return components_.empty() ? 0 : components_.front().num_vars(); }
  /// Max degree over components.
  int degree() const;

 private:
  std::vector<Polynomial> components_;
};

/// Variable names x1..xn, u1..um.
std::vector<std::string> variable_names(int n, int m);

}  // namespace momentctl::poly
