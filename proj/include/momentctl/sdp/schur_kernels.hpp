#pragma once

#include <vector>

#include <Eigen/Dense>

#include "momentctl/sdp/conic_problem.hpp"

namespace momentctl::sdp {

/// The rows of A restricted to one PSD segment, expanded to symmetric
/// matrices A_i stored as full-matrix coordinate lists (both triangles).
/// <A_i, X> equals the row of A applied to svec(X).
struct BlockOperator {
  struct Entry {
    int i, j;
    double a;
  };
  int side = 0;
  int rows = 0;
  std::vector<int> row_start;  // size rows+1, CSR over constraint rows
  std::vector<Entry> entries;

  /// out(r) += <A_r, W> for every constraint row r.
  void apply_add(const Eigen::MatrixXd& W, Eigen::VectorXd& out) const;
  /// sum_r y(r) A_r.
  Eigen::MatrixXd adjoint(const Eigen::VectorXd& y) const;
  double row_frobenius_norm(int r) const;
};

/// Extracts the operator of the PSD segment starting at `offset` in x.
BlockOperator make_block_operator(const SparseRowMatrix& A, int offset, int side);

/// M(r, t) += tr(A_r X A_t S^{-1}) for every pair of rows (HKM Schur
/// complement contribution of one PSD block).
///
/// Serial reference: direct quadruple sum over coordinate entries. Cost
/// grows with the square of the entry count; kept for testing.
void schur_psd_reference(const BlockOperator& op, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Sinv,
                         Eigen::MatrixXd& M);

/// OpenMP kernel: for each row t forms W_t = X A_t S^{-1} with a dense
/// product and reads off tr(A_r W_t). Columns of M are distributed over
/// threads; each column is computed by one thread in a fixed order, so the
/// result does not depend on the thread count.
void schur_psd_parallel(const BlockOperator& op, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Sinv,
                        Eigen::MatrixXd& M);

}  // namespace momentctl::sdp
