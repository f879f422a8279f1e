#pragma once

#include <cstdint>
#include <vector>

namespace momentctl {

/// Halton low-discrepancy points in [0,1)^dim, starting after `skip` points.
/// Deterministic; dim <= 16.
std::vector<std::vector<double>> halton_points(int dim, int count, std::uint64_t skip = 0);

/// Uniform tensor grid on [lo_i, hi_i] with points_per_dim[i] nodes each,
/// enumerated with the first coordinate varying slowest.
std::vector<std::vector<double>> tensor_grid(const std::vector<double>& lo, const std::vector<double>& hi,
                                             const std::vector<int>& points_per_dim);

}  // namespace momentctl
