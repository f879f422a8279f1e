#include "momentctl/relax/certificate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "momentctl/errors.hpp"
#include "momentctl/poly/generator.hpp"
#include "momentctl/relax/conic_form.hpp"
#include "momentctl/sampling.hpp"

namespace momentctl::relax {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SideReport side_report(const sdp::ConicSolution& sol, double seconds) {
  return {sol.status, sol.residuals, sol.iterations, seconds, sol.message};
}

sdp::ConicSolution timed_solve(const sdp::ConicBackend& backend, const sdp::ConicProblem& prob,
                               const sdp::SolverOptions& opts, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  sdp::ConicSolution sol = backend.solve(prob, opts);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace

std::vector<std::vector<double>> validation_points(const ocp::OcpProblem& p) {
  const ocp::Box box = ocp::bounding_box(p);
  const int nv = p.num_vars();
  std::vector<int> per_dim(nv);
  double total = 1.0;
  for (int v = 0; v < nv; ++v) {
    per_dim[v] = v < p.n ? 51 : 21;
    total *= per_dim[v];
  }
  std::vector<std::vector<double>> pts;
  if (total <= 250000.0) {
    pts = tensor_grid(box.lo, box.hi, per_dim);
  } else {
    pts = halton_points(nv, 10000);
    for (auto& h : pts) {
      for (int v = 0; v < nv; ++v) h[v] = box.lo[v] + (box.hi[v] - box.lo[v]) * h[v];
    }
  }
  std::erase_if(pts, [&](const auto& xu) { return ocp::constraint_margin(p, xu) < 0.0; });
  return pts;
}

double subsolution_residual(const ocp::OcpProblem& p, const Polynomial& phi,
                            const std::vector<std::vector<double>>& points) {
  const Polynomial slack = poly::apply_generator(phi, p.f, p.lambda) - p.g;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& xu : points) worst = std::max(worst, slack.evaluate(xu));
  return worst;
}

double expected_value(const ocp::InitialMeasure& mu, const Polynomial& phi) {
  double v = 0.0;
  for (const auto& [alpha, c] : phi.terms()) v += c * ocp::initial_moment(mu, alpha);
  return v;
}

ValueCertificate extract_certificate(const ocp::OcpProblem& p, const MomentSdp& primal,
                                     const sdp::ConicSolution& primal_sol, const SosProgram& dual,
                                     const sdp::ConicSolution& dual_sol) {
  const bool primal_ok = sdp::is_solved(primal_sol.status);
  const bool dual_ok = sdp::is_solved(dual_sol.status);
  if (!primal_ok && !dual_ok) {
    throw SolverError("order " + std::to_string(primal.r) + " relaxation failed: moment side " +
                      sdp::to_string(primal_sol.status) + " (" + primal_sol.message + "), SOS side " +
                      sdp::to_string(dual_sol.status) + " (" + dual_sol.message + ")");
  }
  ValueCertificate cert;
  cert.r = primal.r;
  cert.primal = side_report(primal_sol, 0.0);
  cert.dual = side_report(dual_sol, 0.0);
  cert.J_r = kNaN;
  cert.J_star_r = kNaN;
  cert.mass = kNaN;
  cert.residual_max = kNaN;
  cert.phi = Polynomial(p.n);
  if (primal_ok) {
    ConicLayout layout;
    layout.num_rows = primal.index.size();
    cert.z = moments_from_solution(layout, primal_sol.y);
    cert.J_r = primal.objective.dot(cert.z);
    cert.mass = cert.z(0);
  }
  if (dual_ok) {
    ConicLayout layout;
    layout.num_free = static_cast<int>(dual.columns.size());
    const Eigen::VectorXd lambda = coefficients_from_solution(layout, dual_sol.x);
    cert.J_star_r = dual.weights.dot(lambda);
    cert.phi = phi_from_coefficients(p.n, dual.phi_basis, lambda);
    try {
      cert.residual_max = subsolution_residual(p, cert.phi, validation_points(p));
    } catch (const InputError&) {
      // X x U not boxed by ball constraints: no grid to check on.
    }
  }
  return cert;
}

ValueCertificate solve_order(const ocp::OcpProblem& p, int r, const sdp::ConicBackend& backend,
                             const sdp::SolverOptions& opts, const RelaxationOptions& relax_opts) {
  const MomentSdp primal = assemble_primal(p, r, relax_opts);
  const SosProgram dual = assemble_dual(p, r, relax_opts);
  double tp = 0.0, td = 0.0;
  const auto primal_sol = timed_solve(backend, to_conic(primal).problem, opts, tp);
  const auto dual_sol = timed_solve(backend, to_conic(dual).problem, opts, td);
  ValueCertificate cert = extract_certificate(p, primal, primal_sol, dual, dual_sol);
  cert.primal.seconds = tp;
  cert.dual.seconds = td;
  return cert;
}

ValueCertificate solve_dual_only(const ocp::OcpProblem& p, int r, const sdp::ConicBackend& backend,
                                 const sdp::SolverOptions& opts, const RelaxationOptions& relax_opts) {
  const SosProgram dual = assemble_dual(p, r, relax_opts);
  double td = 0.0;
  const auto dual_sol = timed_solve(backend, to_conic(dual).problem, opts, td);
  if (!sdp::is_solved(dual_sol.status)) {
    throw SolverError("order " + std::to_string(r) + " SOS program failed: " + sdp::to_string(dual_sol.status) +
                      " (" + dual_sol.message + ")");
  }
  ValueCertificate cert;
  cert.r = r;
  cert.J_r = kNaN;
  cert.mass = kNaN;
  cert.primal.message = "not solved";
  cert.dual = side_report(dual_sol, td);
  ConicLayout layout;
  layout.num_free = static_cast<int>(dual.columns.size());
  const Eigen::VectorXd lambda = coefficients_from_solution(layout, dual_sol.x);
  cert.J_star_r = dual.weights.dot(lambda);
  cert.phi = phi_from_coefficients(p.n, dual.phi_basis, lambda);
  cert.residual_max = kNaN;
  try {
    cert.residual_max = subsolution_residual(p, cert.phi, validation_points(p));
  } catch (const InputError&) {
  }
  return cert;
}

CertifyReport certify(const ocp::OcpProblem& p, const Polynomial& phi, int r, const sdp::ConicBackend& backend,
                      const sdp::SolverOptions& opts) {
  CertifyReport rep;
  rep.r = r;
  rep.threshold = 1e-6 + opts.tol;
  rep.lower_bound = expected_value(p.initial, phi);
  const SosProgram sos = assemble_certification(p, phi, r);
  double seconds = 0.0;
  const auto sol = timed_solve(backend, to_conic(sos).problem, opts, seconds);
  rep.solve = side_report(sol, seconds);
  rep.margin = sdp::is_solved(sol.status) ? sol.x(0) : kNaN;
  rep.residual_max = kNaN;
  try {
    rep.residual_max = subsolution_residual(p, phi, validation_points(p));
  } catch (const InputError&) {
  }
  if (!sdp::is_solved(sol.status)) {
    rep.reason = "certification program " + sdp::to_string(sol.status) + ": " + sol.message;
  } else if (rep.margin < -rep.threshold) {
    rep.reason = "g - A phi is not in the order-" + std::to_string(r) + " quadratic module (margin " +
                 std::to_string(rep.margin) + ")";
  } else if (std::isfinite(rep.residual_max) && rep.residual_max > rep.threshold) {
    rep.reason = "A phi - g reaches " + std::to_string(rep.residual_max) + " on the validation grid";
  } else {
    rep.accepted = true;
    rep.reason = "certified";
  }
  return rep;
}

}  // namespace momentctl::relax
