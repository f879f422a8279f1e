#include "momentctl/sdp/schur_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <omp.h>

namespace momentctl::sdp {

void BlockOperator::apply_add(const Eigen::MatrixXd& W, Eigen::VectorXd& out) const {
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int e = row_start[r]; e < row_start[r + 1]; ++e) acc += entries[e].a * W(entries[e].i, entries[e].j);
    out(r) += acc;
  }
}

Eigen::MatrixXd BlockOperator::adjoint(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(side, side);
  for (int r = 0; r < rows; ++r) {
    if (y(r) == 0.0) continue;
    for (int e = row_start[r]; e < row_start[r + 1]; ++e) S(entries[e].i, entries[e].j) += entries[e].a * y(r);
  }
  return S;
}

double BlockOperator::row_frobenius_norm(int r) const {
  double s = 0.0;
  for (int e = row_start[r]; e < row_start[r + 1]; ++e) s += entries[e].a * entries[e].a;
  return std::sqrt(s);
}

BlockOperator make_block_operator(const SparseRowMatrix& A, int offset, int side) {
  BlockOperator op;
  op.side = side;
  op.rows = static_cast<int>(A.rows());
  op.row_start.assign(op.rows + 1, 0);
  const int width = side * (side + 1) / 2;
  // svec position -> (i, j)
  std::vector<std::pair<int, int>> coord(width);
  for (int j = 0; j < side; ++j) {
    for (int i = j; i < side; ++i) coord[svec_index(side, i, j)] = {i, j};
  }
  for (int r = 0; r < op.rows; ++r) {
    for (SparseRowMatrix::InnerIterator it(A, r); it; ++it) {
      const int k = static_cast<int>(it.col()) - offset;
      if (k < 0 || k >= width || it.value() == 0.0) continue;
      auto [i, j] = coord[k];
      if (i == j) {
        op.entries.push_back({i, i, it.value()});
      } else {
        const double a = it.value() / std::numbers::sqrt2;
        op.entries.push_back({i, j, a});
        op.entries.push_back({j, i, a});
      }
    }
    op.row_start[r + 1] = static_cast<int>(op.entries.size());
  }
  return op;
}

void schur_psd_reference(const BlockOperator& op, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Sinv,
                         Eigen::MatrixXd& M) {
  for (int r = 0; r < op.rows; ++r) {
    for (int t = 0; t < op.rows; ++t) {
      double acc = 0.0;
      for (int e = op.row_start[r]; e < op.row_start[r + 1]; ++e) {
        const auto& ar = op.entries[e];
        for (int f = op.row_start[t]; f < op.row_start[t + 1]; ++f) {
          const auto& at = op.entries[f];
          acc += ar.a * at.a * X(ar.j, at.i) * Sinv(at.j, ar.i);
        }
      }
      M(r, t) += acc;
    }
  }
}

void schur_psd_parallel(const BlockOperator& op, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Sinv,
                        Eigen::MatrixXd& M) {
  const int s = op.side;
  // Rows touching this block; rows with no entries contribute nothing.
  std::vector<int> active;
  for (int r = 0; r < op.rows; ++r) {
    if (op.row_start[r + 1] > op.row_start[r]) active.push_back(r);
  }
  const int na = static_cast<int>(active.size());

#pragma omp parallel
  {
    Eigen::MatrixXd T(s, s), W(s, s), Xk(s, s);
    std::vector<int> slot(s, -1);
    std::vector<int> used;
#pragma omp for schedule(dynamic, 4)
    for (int ti = 0; ti < na; ++ti) {
      const int t = active[ti];
      // T = A_t S^{-1}, restricted to the distinct rows k of A_t.
      used.clear();
      for (int f = op.row_start[t]; f < op.row_start[t + 1]; ++f) {
        const int k = op.entries[f].i;
        if (slot[k] < 0) {
          slot[k] = static_cast<int>(used.size());
          used.push_back(k);
          T.row(slot[k]).setZero();
        }
        T.row(slot[k]).noalias() += op.entries[f].a * Sinv.row(op.entries[f].j);
      }
      const int nk = static_cast<int>(used.size());
      for (int c = 0; c < nk; ++c) Xk.col(c) = X.col(used[c]);
      W.noalias() = Xk.leftCols(nk) * T.topRows(nk);
      for (int k : used) slot[k] = -1;
      for (int ri = 0; ri < na; ++ri) {
        const int r = active[ri];
        double acc = 0.0;
        for (int e = op.row_start[r]; e < op.row_start[r + 1]; ++e) {
          acc += op.entries[e].a * W(op.entries[e].j, op.entries[e].i);
        }
        M(r, t) += acc;
      }
    }
  }
}

}  // namespace momentctl::sdp
