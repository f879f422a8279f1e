#include "momentctl/sdp/conic_problem.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "momentctl/errors.hpp"

namespace momentctl::sdp {

void ConicProblem::check() const {
  int total = 0;
  for (const auto& seg : cones) {
    if (seg.size < 0) throw InputError("cone segment with negative size");
    total += seg.dim();
  }
  if (total != num_vars()) {
    throw InputError("cone segments cover " + std::to_string(total) + " entries but c has " +
                     std::to_string(num_vars()));
  }
  if (A.cols() != num_vars() || A.rows() != num_rows()) {
    throw InputError("constraint matrix is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                     ", expected " + std::to_string(num_rows()) + "x" + std::to_string(num_vars()));
  }
  for (int i = 0; i < A.outerSize(); ++i) {
    bool nonzero = false;
    for (SparseRowMatrix::InnerIterator it(A, i); it; ++it) nonzero = nonzero || it.value() != 0.0;
    if (!nonzero) throw InputError("constraint row " + std::to_string(i) + " is identically zero");
  }
  if (!c.allFinite() || !b.allFinite()) throw InputError("problem data contains non-finite values");
}

Eigen::VectorXd svec(const Eigen::MatrixXd& X) {
  const int s = static_cast<int>(X.rows());
  Eigen::VectorXd v(s * (s + 1) / 2);
  for (int j = 0; j < s; ++j) {
    for (int i = j; i < s; ++i) {
      v(svec_index(s, i, j)) = i == j ? X(i, j) : std::numbers::sqrt2 * 0.5 * (X(i, j) + X(j, i));
    }
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int side) {
  Eigen::MatrixXd X(side, side);
  for (int j = 0; j < side; ++j) {
    for (int i = j; i < side; ++i) {
      const double e = v(svec_index(side, i, j));
      if (i == j) {
        X(i, i) = e;
      } else {
        X(i, j) = X(j, i) = e / std::numbers::sqrt2;
      }
    }
  }
  return X;
}

}  // namespace momentctl::sdp
