#pragma once

#include <vector>

#include <Eigen/Dense>

#include "momentctl/relax/assembly.hpp"
#include "momentctl/sdp/conic_problem.hpp"

namespace momentctl::relax {

/// Where each piece of an assembled program lives in the conic vectors.
/// Rows are the moment indices gamma in graded-lex order; variables are the
/// free coefficients followed by one PSD segment per block.
struct ConicLayout {
  struct Block {
    int constraint = -1;
    int offset = 0;
    int side = 0;
  };
  int num_rows = 0;
  int free_offset = 0;
  int num_free = 0;
  std::vector<Block> blocks;
};

struct ConicForm {
  sdp::ConicProblem problem;
  ConicLayout layout;
};

/// Moment program as the conic problem
///   min b'w  s.t.  sum_alpha w_alpha h^alpha - sum_k <B_k,X_k> = -g,  X_k >= 0,
/// whose dual multipliers are the moments: y = z, and b'y = -L_z(g).
ConicForm to_conic(const MomentSdp& sdp);

/// SOS program as
///   min -w't  s.t.  sum_k t_k column_k + sum_k <B_k,G_k> = rhs,  G_k >= 0,
/// with the free variables t_k first and Gram matrices G_k after.
ConicForm to_conic(const SosProgram& sos);

/// Recovers z from a solution of to_conic(MomentSdp).
Eigen::VectorXd moments_from_solution(const ConicLayout& layout, const Eigen::VectorXd& y);
/// Recovers the free coefficients t from a solution of to_conic(SosProgram).
Eigen::VectorXd coefficients_from_solution(const ConicLayout& layout, const Eigen::VectorXd& x);
/// Gram matrix of block k.
Eigen::MatrixXd gram_from_solution(const ConicLayout& layout, const Eigen::VectorXd& x, int k);

}  // namespace momentctl::relax
