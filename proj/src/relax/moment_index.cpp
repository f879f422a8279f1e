#include "momentctl/relax/moment_index.hpp"

#include <string>

#include "momentctl/errors.hpp"

namespace momentctl::relax {

MomentIndexMap::MomentIndexMap(int num_vars, int r) : num_vars_(num_vars), r_(r) {
  if (r < 0) throw InputError("relaxation order must be nonnegative");
  basis_ = poly::monomials_up_to(num_vars, 2 * r);
  position_.reserve(basis_.size());
  for (std::size_t i = 0; i < basis_.size(); ++i) position_.emplace(basis_[i], static_cast<int>(i));
}

int MomentIndexMap::find(const MultiIndex& gamma) const {
  auto it = position_.find(gamma);
  return it == position_.end() ? -1 : it->second;
}

int MomentIndexMap::position(const MultiIndex& gamma) const {
  const int p = find(gamma);
  if (p < 0) {
    throw InputError("monomial of degree " + std::to_string(gamma.degree()) + " outside the order-" +
                     std::to_string(r_) + " moment basis");
  }
  return p;
}

}  // namespace momentctl::relax
