#include "momentctl/poly/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "momentctl/errors.hpp"

namespace momentctl::poly {

Polynomial Polynomial::constant(int num_vars, double c) {
  Polynomial p(num_vars);
  p.add_term(MultiIndex(num_vars), c);
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& alpha, double c) {
  Polynomial p(static_cast<int>(alpha.size()));
  p.add_term(alpha, c);
  return p;
}

Polynomial Polynomial::variable(int num_vars, int i) {
  if (i < 0 || i >= num_vars) throw InputError("variable index out of range");
  return monomial(MultiIndex::unit(num_vars, i));
}

int Polynomial::degree() const {
  // Graded-lex order: the last term has maximal degree.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

int Polynomial::degree_in(int first, int count) const {
  int d = 0;
  for (const auto& [alpha, c] : terms_) {
    int s = 0;
    for (int i = first; i < first + count; ++i) s += alpha[i];
    d = std::max(d, s);
  }
  return d;
}

double Polynomial::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const MultiIndex& alpha, double c) {
  if (static_cast<int>(alpha.size()) != num_vars_) throw InputError("term has wrong number of variables");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(alpha, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != num_vars_) throw InputError("evaluation point has wrong dimension");
  double sum = 0.0;
  for (const auto& [alpha, c] : terms_) {
    double t = c;
    for (int i = 0; i < num_vars_; ++i) {
      for (int e = 0; e < alpha[i]; ++e) t *= point[i];
    }
    sum += t;
  }
  return sum;
}

void Polynomial::require_same_vars(const Polynomial& b, const char* op) const {
  if (b.num_vars_ != num_vars_) {
    throw InputError(std::string("polynomial ") + op + ": variable count mismatch (" +
                     std::to_string(num_vars_) + " vs " + std::to_string(b.num_vars_) + ")");
  }
}

Polynomial Polynomial::operator+(const Polynomial& b) const {
  require_same_vars(b, "add");
  Polynomial r(*this);
  for (const auto& [alpha, c] : b.terms_) r.add_term(alpha, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& b) const {
  require_same_vars(b, "sub");
  Polynomial r(*this);
  for (const auto& [alpha, c] : b.terms_) r.add_term(alpha, -c);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& b) const {
  require_same_vars(b, "mul");
  Polynomial r(num_vars_);
  for (const auto& [a1, c1] : terms_) {
    for (const auto& [a2, c2] : b.terms_) r.add_term(a1 + a2, c1 * c2);
  }
  return r;
}

Polynomial Polynomial::scaled(double c) const {
  Polynomial r(num_vars_);
  if (c == 0.0) return r;
  for (const auto& [alpha, v] : terms_) r.add_term(alpha, v * c);
  return r;
}

Polynomial Polynomial::partial_derivative(int i) const {
  if (i < 0 || i >= num_vars_) throw InputError("partial_derivative: variable index out of range");
  Polynomial r(num_vars_);
  for (const auto& [alpha, c] : terms_) {
    if (alpha[i] == 0) continue;
    MultiIndex d(alpha);
    d[i] -= 1;
    r.add_term(d, c * alpha[i]);
  }
  return r;
}

Polynomial Polynomial::lifted(int extra) const {
  Polynomial r(num_vars_ + extra);
  for (const auto& [alpha, c] : terms_) r.add_term(alpha.lifted(extra), c);
  return r;
}

std::string Polynomial::to_string(std::span<const std::string> names) const {
  if (static_cast<int>(names.size()) != num_vars_) throw InputError("to_string: wrong number of names");
  if (terms_.empty()) return "0";
  std::string out;
  char buf[40];
  bool first = true;
  for (const auto& [alpha, c] : terms_) {
    double mag = c;
    if (first) {
      if (c < 0) { out += "-"; mag = -c; }
    } else {
      out += c < 0 ? " - " : " + ";
      mag = std::fabs(c);
    }
    first = false;
    std::string factors;
    for (int i = 0; i < num_vars_; ++i) {
      if (alpha[i] == 0) continue;
      if (!factors.empty()) factors += "*";
      factors += names[i];
      if (alpha[i] > 1) factors += "^" + std::to_string(alpha[i]);
    }
    if (factors.empty() || mag != 1.0) {
      std::snprintf(buf, sizeof buf, "%.17g", mag);
      out += buf;
      if (!factors.empty()) out += "*";
    }
    out += factors;
  }
  return out;
}

PolynomialVector::PolynomialVector(std::vector<Polynomial> components)
    : components_(std::move(components)) {
  for (const auto& p : components_) {
    if (p.num_vars() != components_.front().num_vars()) {
      throw InputError("polynomial vector components have different variable counts");
    }
  }
}

int PolynomialVector::degree() const {
  int d = 0;
  for (const auto& p : components_) d = std::max(d, p.degree());
  return d;
}

std::vector<std::string> variable_names(int n, int m) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  for (int j = 1; j <= m; ++j) names.push_back("u" + std::to_string(j));
  return names;
}

}  // namespace momentctl::poly
