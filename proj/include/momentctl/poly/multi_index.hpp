#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace momentctl::poly {

/// Exponent vector of a monomial x^alpha.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t num_vars) : exps_(num_vars, 0) {}
  MultiIndex(std::initializer_list<int> exps) : exps_(exps) {}
  explicit MultiIndex(std::vector<int> exps) : exps_(std::move(exps)) {}

  static MultiIndex unit(std::size_t num_vars, std::size_t i);

  std::size_t size() const { return exps_.size(); }
  int operator[](std::size_t i) const { return exps_[i]; }
  int& operator[](std::size_t i) { return exps_[i]; }
  std::span<const int> exponents() const { return exps_; }

  /// Total degree |alpha|.
  int degree() const;
  bool is_zero() const { return degree() == 0; }

  /// Componentwise sum; sizes must agree.
  MultiIndex operator+(const MultiIndex& other) const;

  /// Appends `extra` zero exponents (lifts an x-index into (x,u) space).
  MultiIndex lifted(std::size_t extra) const;
  /// First `count` exponents.
  MultiIndex head(std::size_t count) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> exps_;
};

/// Graded lexicographic order: lower total degree first, ties broken by
/// lexicographically larger exponent vector first, so (1,0) < (0,1).
struct GradedLexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& a) const;
};

/// binom(num_vars + d, d): the number of monomials of degree <= d.
std::int64_t count_monomials(int num_vars, int d);

/// All multi-indices with |alpha| <= d, in graded-lex order.
std::vector<MultiIndex> monomials_up_to(int num_vars, int d);

}  // namespace momentctl::poly
