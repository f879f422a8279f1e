#include "momentctl/poly/generator.hpp"

#include "momentctl/errors.hpp"

namespace momentctl::poly {

Polynomial apply_generator(const Polynomial& phi, const PolynomialVector& f, double lambda) {
  const int n = phi.num_vars();
  if (static_cast<int>(f.size()) != n) {
    throw InputError("apply_generator: phi has " + std::to_string(n) + " variables but f has " +
                     std::to_string(f.size()) + " components");
  }
  const int total = f.num_vars();
  if (total < n) throw InputError("apply_generator: dynamics have fewer variables than the state");
  const int m = total - n;

  Polynomial result = phi.lifted(m).scaled(lambda);
  for (int k = 0; k < n; ++k) {
    Polynomial dphi = phi.partial_derivative(k);
    if (dphi.is_zero()) continue;
    result = result - dphi.lifted(m) * f[k];
  }
  return result;
}

Polynomial h_alpha(const MultiIndex& alpha, const PolynomialVector& f, double lambda) {
  return apply_generator(Polynomial::monomial(alpha), f, lambda);
}

}  // namespace momentctl::poly
