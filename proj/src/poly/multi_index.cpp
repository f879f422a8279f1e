#include "momentctl/poly/multi_index.hpp"

#include <algorithm>
#include <numeric>

#include "momentctl/errors.hpp"

namespace momentctl::poly {

MultiIndex MultiIndex::unit(std::size_t num_vars, std::size_t i) {
  MultiIndex a(num_vars);
  a[i] = 1;
  return a;
}

int MultiIndex::degree() const { return std::accumulate(exps_.begin(), exps_.end(), 0); }

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.size() != size()) throw InputError("multi-index size mismatch");
  MultiIndex r(*this);
  for (std::size_t i = 0; i < size(); ++i) r.exps_[i] += other.exps_[i];
  return r;
}

MultiIndex MultiIndex::lifted(std::size_t extra) const {
  MultiIndex r(*this);
  r.exps_.resize(size() + extra, 0);
  return r;
}

MultiIndex MultiIndex::head(std::size_t count) const {
  return MultiIndex(std::vector<int>(exps_.begin(), exps_.begin() + std::min(count, size())));
}

bool GradedLexLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
  const int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  const auto ea = a.exponents(), eb = b.exponents();
  return std::lexicographical_compare(eb.begin(), eb.end(), ea.begin(), ea.end());
}

std::size_t MultiIndexHash::operator()(const MultiIndex& a) const {
  std::size_t h = 1469598103934665603ull;
  for (int e : a.exponents()) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::int64_t count_monomials(int num_vars, int d) {
  // binom(n+d, d) computed incrementally; exact for the sizes used here.
  std::int64_t r = 1;
  for (int k = 1; k <= d; ++k) r = r * (num_vars + k) / k;
  return r;
}

namespace {

void compositions(int num_vars, int pos, int remaining, std::vector<int>& cur,
                  std::vector<MultiIndex>& out) {
  if (pos == num_vars - 1) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[pos] = e;
    compositions(num_vars, pos + 1, remaining - e, cur, out);
  }
}

}  // namespace

std::vector<MultiIndex> monomials_up_to(int num_vars, int d) {
  if (num_vars < 1) throw InputError("monomials_up_to: num_vars must be >= 1");
  if (d < 0) throw InputError("monomials_up_to: degree must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(count_monomials(num_vars, d)));
  std::vector<int> cur(num_vars, 0);
  for (int k = 0; k <= d; ++k) compositions(num_vars, 0, k, cur, out);
  return out;
}

}  // namespace momentctl::poly
