#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "momentctl/poly/polynomial.hpp"

namespace momentctl::ocp {

using poly::MultiIndex;
using poly::Polynomial;
using poly::PolynomialVector;

/// Initial distribution mu_0: a Dirac mass at x0 or a uniform probability
/// measure on a box or a Euclidean ball.
struct InitialMeasure {
  enum class Kind { kDirac, kUniformBox, kUniformBall };

  Kind kind = Kind::kDirac;
  std::vector<double> point;  // x0 (dirac) or center (ball)
  std::vector<double> lo, hi;  // box
  double radius = 0.0;         // ball

  static InitialMeasure dirac(std::vector<double> x0);
  static InitialMeasure uniform_box(std::vector<double> lo, std::vector<double> hi);
  static InitialMeasure uniform_ball(std::vector<double> center, double radius);

  int dimension() const;
  /// Points used to check that the support lies in X: the Dirac point, or
  /// `count` quasi-random points plus boundary points for box and ball.
  std::vector<std::vector<double>> support_samples(int count = 1000) const;
};

/// Integral of x^alpha against mu_0.
double initial_moment(const InitialMeasure& meas, const MultiIndex& alpha);

/// Discounted infinite-horizon control problem with polynomial data.
/// Polynomials f, g, q are in the n+m variables (x1..xn, u1..um).
struct OcpProblem {
  int n = 0;
  int m = 0;
  PolynomialVector f;
  Polynomial g;
  double lambda = 0.0;
  std::vector<Polynomial> q;
  InitialMeasure initial;

  int num_vars() const { return n + m; }
  /// True when q_i does not involve any input variable.
  bool is_state_constraint(std::size_t i) const;
};

struct Finding {
  enum class Severity { kError, kWarning };
  Severity severity;
  std::string message;
};

/// Structural and assumption checks. Errors make the problem unusable;
/// warnings flag conditions the theory needs but assembly does not.
std::vector<Finding> validate(const OcpProblem& p);
bool has_errors(const std::vector<Finding>& findings);

/// Appends K - |x|^2 - |u|^2 to q unless an identical polynomial is present.
OcpProblem augment_ball(const OcpProblem& p, double K);

/// q = K - sum_v c_v v^2 with K > 0 and c_v > 0 (c_v = 0 for absent v).
struct BallShape {
  double K = 0.0;
  std::vector<double> weights;
};
std::optional<BallShape> as_ball_constraint(const Polynomial& q);

/// True when the ball-shaped constraints together bound every variable, so
/// that their sum is a ball polynomial in the quadratic module.
bool has_archimedean_certificate(const OcpProblem& p);

struct Box {
  std::vector<double> lo, hi;
};
/// Per-variable bounds on X x U implied by ball-shaped constraints.
/// Throws InputError when some variable is not bounded that way.
Box bounding_box(const OcpProblem& p);

/// Min over state-only constraints of q_i(x); +inf when there are none.
double state_constraint_margin(const OcpProblem& p, std::span<const double> x);
/// Min over all constraints of q_i(x,u).
double constraint_margin(const OcpProblem& p, std::span<const double> xu);

/// If X (state-only constraints) is exactly a Euclidean ball centred at the
/// origin, its radius.
std::optional<double> state_set_ball_radius(const OcpProblem& p);

/// Largest operator 2-norm of d f / d x over sampled points of X x U.
double estimate_lipschitz(const OcpProblem& p, int samples = 1000);

}  // namespace momentctl::ocp
