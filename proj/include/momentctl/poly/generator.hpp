#pragma once

#include "momentctl/poly/polynomial.hpp"

namespace momentctl::poly {

/// (A phi)(x,u) = lambda*phi(x) - grad_x phi(x) . f(x,u).
///
/// `phi` lives in the n state variables, each f_k in the n+m state/input
/// variables; the result is in n+m variables.
Polynomial apply_generator(const Polynomial& phi, const PolynomialVector& f, double lambda);

/// h^(alpha) = A x^alpha, the data of the moment equality for alpha.
Polynomial h_alpha(const MultiIndex& alpha, const PolynomialVector& f, double lambda);

}  // namespace momentctl::poly
