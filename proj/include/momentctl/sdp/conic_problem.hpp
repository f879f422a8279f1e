#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace momentctl::sdp {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// One segment of the variable vector.
struct ConeSegment {
  enum class Kind { kFree, kNonneg, kPsd };
  Kind kind = Kind::kFree;
  int size = 0;  // entry count for free/nonneg, matrix side for psd

  static ConeSegment free(int k) { return {Kind::kFree, k}; }
  static ConeSegment nonneg(int k) { return {Kind::kNonneg, k}; }
  static ConeSegment psd(int side) { return {Kind::kPsd, side}; }

  /// Number of entries in the variable vector.
  int dim() const { return kind == Kind::kPsd ? size * (size + 1) / 2 : size; }
  friend bool operator==(const ConeSegment&, const ConeSegment&) = default;
};

/// Standard form  min c'x  s.t.  A x = b,  x in K,  with dual
/// max b'y  s.t.  c - A'y = s,  s in K*  (s = 0 on free segments).
///
/// PSD segments hold svec(X): the lower triangle column by column, with
/// off-diagonal entries multiplied by sqrt(2) so that svec(X).svec(Y) = <X,Y>.
struct ConicProblem {
  Eigen::VectorXd c;
  SparseRowMatrix A;
  Eigen::VectorXd b;
  std::vector<ConeSegment> cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }

  /// Throws InputError on inconsistent dimensions or all-zero rows of A.
  void check() const;
};

/// Position of (i, j), i >= j, inside svec of a side-`side` matrix.
inline int svec_index(int side, int i, int j) { return j * side - j * (j - 1) / 2 + (i - j); }

Eigen::VectorXd svec(const Eigen::MatrixXd& X);
Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int side);

}  // namespace momentctl::sdp
