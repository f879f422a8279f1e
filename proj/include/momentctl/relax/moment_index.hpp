#pragma once

#include <unordered_map>
#include <vector>

#include "momentctl/poly/multi_index.hpp"

namespace momentctl::relax {

using poly::MultiIndex;

/// Graded-lex enumeration of the moments z_gamma, |gamma| <= 2r, over the
/// (x,u) variables, with the inverse map.
class MomentIndexMap {
 public:
  MomentIndexMap() = default;
  MomentIndexMap(int num_vars, int r);

  int r() const { return r_; }
  int num_vars() const { return num_vars_; }
  int size() const { return static_cast<int>(basis_.size()); }
  const std::vector<MultiIndex>& basis() const { return basis_; }
  const MultiIndex& operator[](int i) const { return basis_[i]; }

  /// Position of gamma; throws InputError if |gamma| > 2r.
  int position(const MultiIndex& gamma) const;
  /// Position of gamma or -1.
  int find(const MultiIndex& gamma) const;

 private:
  int num_vars_ = 0;
  int r_ = 0;
  std::vector<MultiIndex> basis_;
  std::unordered_map<MultiIndex, int, poly::MultiIndexHash> position_;
};

}  // namespace momentctl::relax
