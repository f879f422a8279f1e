#include "momentctl/sampling.hpp"

#include "momentctl/errors.hpp"

namespace momentctl {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<std::vector<double>> halton_points(int dim, int count, std::uint64_t skip) {
  if (dim < 1 || dim > 16) throw InputError("halton_points: dimension must be in [1,16]");
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (int k = 0; k < count; ++k) {
    for (int d = 0; d < dim; ++d) pts[k][d] = radical_inverse(skip + k + 1, kPrimes[d]);
  }
  return pts;
}

std::vector<std::vector<double>> tensor_grid(const std::vector<double>& lo, const std::vector<double>& hi,
                                             const std::vector<int>& points_per_dim) {
  const std::size_t dim = lo.size();
  if (hi.size() != dim || points_per_dim.size() != dim) throw InputError("tensor_grid: dimension mismatch");
  std::size_t total = 1;
  for (int k : points_per_dim) {
    if (k < 1) throw InputError("tensor_grid: need at least one point per dimension");
    total *= static_cast<std::size_t>(k);
  }
  std::vector<std::vector<double>> pts;
  pts.reserve(total);
  std::vector<int> idx(dim, 0);
  for (std::size_t t = 0; t < total; ++t) {
    std::vector<double> p(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const int k = points_per_dim[d];
      p[d] = k == 1 ? 0.5 * (lo[d] + hi[d]) : lo[d] + (hi[d] - lo[d]) * idx[d] / (k - 1);
    }
    pts.push_back(std::move(p));
    for (int d = static_cast<int>(dim) - 1; d >= 0; --d) {
      if (++idx[d] < points_per_dim[d]) break;
      idx[d] = 0;
    }
  }
  return pts;
}

}  // namespace momentctl
