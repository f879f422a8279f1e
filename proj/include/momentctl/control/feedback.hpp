#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "momentctl/ocp/problem.hpp"

namespace momentctl::control {

using poly::MultiIndex;
using poly::Polynomial;

/// Feedback derived from a value-function approximation phi by minimizing
/// u -> g(x,u) - (A phi)(x,u) over U.
struct FeedbackLaw {
  enum class Kind { kPointwiseArgmin, kSignLaw };
  Kind kind = Kind::kPointwiseArgmin;
  Polynomial phi;              // in the n state variables
  std::vector<int> ugrid;      // points per input, pointwise kind; empty = default
  int r = 0;                   // relaxation order phi came from
  std::string source;          // free-form provenance label
};

/// Reason the sign law does not apply to p, or nullopt if it does: needs
/// m = 1, f affine in u with some u dependence, g free of u, and U an
/// interval not depending on x.
std::optional<std::string> sign_law_inadmissible(const ocp::OcpProblem& p);

/// Sign law if admissible, otherwise the grid argmin.
FeedbackLaw make_law(const ocp::OcpProblem& p, const Polynomial& phi, int r = 0, std::string source = {});

/// 201 points per input for m <= 2, 21 beyond.
std::vector<int> default_ugrid(int m);

/// A law prepared for repeated evaluation on one problem.
class Controller {
 public:
  Controller(const ocp::OcpProblem& p, const FeedbackLaw& law);
  std::vector<double> operator()(std::span<const double> x) const;
  FeedbackLaw::Kind kind() const { return kind_; }

 private:
  std::vector<double> argmin(std::span<const double> x) const;
  double sign_law(std::span<const double> x) const;

  FeedbackLaw::Kind kind_;
  int n_ = 0, m_ = 0;
  // g - A phi grouped by powers of u: value = sum_k coef_k(x) * u^{beta_k}.
  std::vector<MultiIndex> u_powers_;
  std::vector<Polynomial> u_coefs_;
  std::vector<std::vector<double>> grid_;  // admissible inputs, lexicographic
  std::vector<Polynomial> mixed_;          // constraints coupling x and u
  Polynomial switching_;                   // d/du (g - A phi), sign law only
  double lo_ = 0.0, hi_ = 0.0;
};

/// argmin over the input grid of g(x,u) - (A phi)(x,u); ties go to the
/// lexicographically smallest u. Throws InputError for an empty grid.
std::vector<double> pointwise_control(const ocp::OcpProblem& p, const Polynomial& phi, std::span<const double> x,
                                      const std::vector<int>& ugrid = {});

/// Bang-bang minimizer of the u-linear term of g - A phi: the upper end of
/// U when its coefficient is negative, otherwise the lower end (ties too).
/// Throws InputError when the sign law is inadmissible for p.
double sign_law_control(const ocp::OcpProblem& p, const Polynomial& phi, std::span<const double> x);

}  // namespace momentctl::control
