#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "momentctl/ocp/problem.hpp"
#include "momentctl/relax/assembly.hpp"
#include "momentctl/sdp/solver.hpp"

namespace momentctl::relax {

/// Outcome of one conic solve.
struct SideReport {
  sdp::SolveStatus status = sdp::SolveStatus::kError;
  sdp::Residuals residuals;
  int iterations = 0;
  double seconds = 0.0;
  std::string message;
};

struct ValueCertificate {
  int r = 0;
  double J_r = 0.0;       // moment side, L_z(g); NaN if that side failed
  double J_star_r = 0.0;  // SOS side, <mu_0, phi>; NaN if that side failed
  Polynomial phi;         // zero polynomial if the SOS side failed
  Eigen::VectorXd z;      // moments, empty if the moment side failed
  double mass = 0.0;      // z_0
  double residual_max = 0.0;  // max of (A phi - g) over the validation grid
  SideReport primal, dual;
};

/// Points of X x U used for residual checks: a tensor grid with 51 nodes per
/// state and 21 per input over the bounding box when that has at most
/// 250000 nodes, otherwise 10^4 Halton points; only points inside X x U
/// are kept.
std::vector<std::vector<double>> validation_points(const ocp::OcpProblem& p);

/// max over points of (A phi - g)(x,u).
double subsolution_residual(const ocp::OcpProblem& p, const Polynomial& phi,
                            const std::vector<std::vector<double>>& points);

/// Packages both solves. Throws SolverError if neither side solved.
ValueCertificate extract_certificate(const ocp::OcpProblem& p, const MomentSdp& primal,
                                     const sdp::ConicSolution& primal_sol, const SosProgram& dual,
                                     const sdp::ConicSolution& dual_sol);

/// Assembles, solves and certifies one order. Both programs are solved.
ValueCertificate solve_order(const ocp::OcpProblem& p, int r, const sdp::ConicBackend& backend,
                             const sdp::SolverOptions& opts = {}, const RelaxationOptions& relax_opts = {});

/// Assembles and solves only the SOS side; J_r is left NaN. Used where just
/// a value-function approximation is needed.
ValueCertificate solve_dual_only(const ocp::OcpProblem& p, int r, const sdp::ConicBackend& backend,
                                 const sdp::SolverOptions& opts = {}, const RelaxationOptions& relax_opts = {});

struct CertifyReport {
  int r = 0;
  double margin = 0.0;  // best t with g - A phi - t in the order-r quadratic module
  double residual_max = 0.0;
  double lower_bound = 0.0;  // <mu_0, phi>
  double threshold = 0.0;
  bool accepted = false;
  SideReport solve;
  std::string reason;
};

/// Checks that phi is a subsolution: SOS margin >= -threshold and grid
/// residual <= threshold, with threshold = 1e-6 + opts.tol.
CertifyReport certify(const ocp::OcpProblem& p, const Polynomial& phi, int r, const sdp::ConicBackend& backend,
                      const sdp::SolverOptions& opts = {});

/// <mu_0, phi>.
double expected_value(const ocp::InitialMeasure& mu, const Polynomial& phi);

}  // namespace momentctl::relax
