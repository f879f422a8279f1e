#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "momentctl/ocp/problem.hpp"
#include "momentctl/poly/polynomial.hpp"
#include "momentctl/relax/moment_index.hpp"

namespace momentctl::relax {

using poly::Polynomial;

/// Sparse linear form sum_k coef_k * v[index_k], indices strictly increasing.
using LinearForm = std::vector<std::pair<int, double>>;

/// Which alpha receive a moment equality L_z(h^alpha) = b^alpha (and which
/// monomials x^alpha span phi in the SOS program).
///
/// kDegreeBound keeps alpha = 0 and every alpha with
/// |alpha| + max(0, deg f - 1) <= 2r, i.e. it bounds deg h^alpha by the
/// degree of the dynamics. kExactDegree uses the true degree of h^alpha, which
/// can admit more alpha when some components of f have lower degree.
enum class EqualitySet { kDegreeBound, kExactDegree };

struct RelaxationOptions {
  EqualitySet equality_set = EqualitySet::kDegreeBound;
};

/// v = ceil(deg q / 2).
int half_degree(const Polynomial& q);

/// Smallest admissible order: max over ceil(deg g / 2), v_i and 1.
int min_order(const ocp::OcpProblem& p);

/// Exponents alpha over x, in graded-lex order.
std::vector<MultiIndex> equality_indices(const ocp::OcpProblem& p, int r, const RelaxationOptions& opts = {});

/// A symmetric matrix whose entries are linear forms in the moment (or
/// coefficient) vector: entry (a,b) gathers weight_c at position
/// basis_a + basis_b + c. constraint = -1 marks the plain moment matrix
/// (sigma_0 on the SOS side).
struct LocalizingBlock {
  int constraint = -1;
  Polynomial weight;
  std::vector<MultiIndex> basis;
  std::vector<LinearForm> lower;  // lower triangle, column by column (svec order)

  int side() const { return static_cast<int>(basis.size()); }
};

/// Order-r moment relaxation:
///   min L_z(g)  s.t.  L_z(h^alpha) = b^alpha (alpha in A_r),
///   M_r(z) >= 0,  M_{r-v_i}(q_i z) >= 0.
struct MomentSdp {
  int r = 0;
  MomentIndexMap index;
  Eigen::VectorXd objective;  // g coefficients over z
  struct Equality {
    MultiIndex alpha;
    LinearForm row;
    double rhs = 0.0;
  };
  std::vector<Equality> equalities;
  std::vector<LocalizingBlock> blocks;
};

/// Order-r SOS program, written with generic free variables t_k:
///   max sum_k w_k t_k  s.t.  rhs - sum_k t_k column_k = sigma_0 + sum_i sigma_i q_i
/// coefficient by coefficient over |gamma| <= 2r. For the value problem the
/// t_k are the coefficients lambda_alpha of phi, column_k = h^alpha,
/// w_k = b^alpha and rhs = g. For certification of a fixed phi there is one
/// margin variable with column 1 and rhs = g - A phi.
struct SosProgram {
  int r = 0;
  MomentIndexMap index;
  std::vector<MultiIndex> phi_basis;  // empty for certification programs
  std::vector<LinearForm> columns;
  Eigen::VectorXd weights;
  Eigen::VectorXd rhs;
  std::vector<LocalizingBlock> gram_blocks;
};

/// Throws InputError naming the minimal order if r is too small.
MomentSdp assemble_primal(const ocp::OcpProblem& p, int r, const RelaxationOptions& opts = {});
SosProgram assemble_dual(const ocp::OcpProblem& p, int r, const RelaxationOptions& opts = {});

/// max t s.t. g - A phi - t = sigma_0 + sum sigma_i q_i.
SosProgram assemble_certification(const ocp::OcpProblem& p, const Polynomial& phi, int r);

/// Smallest order at which a certification program for phi exists.
int min_certification_order(const ocp::OcpProblem& p, const Polynomial& phi);

/// Polynomial sum_alpha lambda_alpha x^alpha in the n state variables.
Polynomial phi_from_coefficients(int n, const std::vector<MultiIndex>& basis, const Eigen::VectorXd& lambda);

}  // namespace momentctl::relax
