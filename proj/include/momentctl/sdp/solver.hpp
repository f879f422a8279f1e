#pragma once

#include <string>

#include "momentctl/sdp/conic_problem.hpp"

namespace momentctl::sdp {

enum class SolveStatus { kOptimal, kNearOptimal, kInfeasible, kUnbounded, kMaxIter, kError };

std::string to_string(SolveStatus s);
SolveStatus status_from_string(const std::string& s);
/// Optimal or near optimal.
bool is_solved(SolveStatus s);

/// Relative KKT residuals:
///   primal = |Ax - b| / (1 + |b|),  dual = |c - A'y - s| / (1 + |c|),
///   gap = |c'x - b'y| / (1 + |c'x| + |b'y|).
struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double max() const;
};

/// `status` refers to the standard-form problem: kInfeasible means no x
/// satisfies Ax = b in K, kUnbounded means c'x is unbounded below.
struct ConicSolution {
  SolveStatus status = SolveStatus::kError;
  Eigen::VectorXd x, y, s;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  Residuals residuals;
  int iterations = 0;
  std::string message;
};

Residuals compute_residuals(const ConicProblem& prob, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& s);

enum class SchurKernel { kParallel, kReference };

/// Nesterov-Todd scaling or the HKM (X S^{-1}) direction.
enum class SearchDirection { kNT, kHKM };

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  bool verbose = false;
  SchurKernel kernel = SchurKernel::kParallel;
  SearchDirection direction = SearchDirection::kNT;
};

/// Common contract of the in-process solver and external file-based solvers.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  virtual ConicSolution solve(const ConicProblem& prob, const SolverOptions& opts) const = 0;
};

/// Infeasible primal-dual path-following method with Mehrotra
/// predictor-corrector steps (NT or HKM direction). Free variables are kept
/// as such and handled through a bordered Schur system.
class InteriorPointBackend final : public ConicBackend {
 public:
  std::string name() const override { return "internal"; }
  ConicSolution solve(const ConicProblem& prob, const SolverOptions& opts) const override;
};

/// Convenience wrapper around InteriorPointBackend.
ConicSolution solve(const ConicProblem& prob, const SolverOptions& opts = {});

}  // namespace momentctl::sdp
