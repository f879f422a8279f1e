#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "momentctl/control/feedback.hpp"
#include "momentctl/relax/assembly.hpp"
#include "momentctl/sdp/solver.hpp"

namespace momentctl::control {

/// Any state feedback x -> u.
using ControlFn = std::function<std::vector<double>(std::span<const double>)>;

struct SimOptions {
  double dt = 1e-3;
  double tail_tol = 1e-4;
  double horizon = 0.0;      // 0: chosen from tail_tol
  double state_tol = 1e-9;   // q_i(x) below -state_tol counts as a violation
  int record_stride = 1;     // keep every k-th step in the trajectory
};

/// Samples every record_stride steps; running_cost is the discounted cost
/// accumulated up to t.
struct Trajectory {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<std::vector<double>> x, u;
  std::vector<double> running_cost;
};

struct Violations {
  long count = 0;             // steps with some state constraint below -state_tol
  double max_depth = 0.0;     // largest -q_i(x)
  double first_time = std::numeric_limits<double>::quiet_NaN();
};

/// One re-solve of iterative_synthesis.
struct Segment {
  double t_start = 0.0;
  std::vector<double> center;  // x-bar
  ocp::InitialMeasure measure;  // averaged-dual initial measure used
  double averaged_value = 0.0;  // <mu_0, phi>
};

struct ClosedLoopReport {
  double V_u = 0.0;
  double truncation_bound = 0.0;  // e^{-lambda T} sup|g| / lambda
  double horizon = 0.0;
  double J_star = std::numeric_limits<double>::quiet_NaN();
  double gap_percent = std::numeric_limits<double>::quiet_NaN();
  Trajectory trajectory;
  Violations violations;
  bool aborted = false;
  bool budget_exhausted = false;
  std::string message;
  std::vector<Segment> segments;

  /// Sets J_star and gap_percent = 100 (V_u - J_star) / J_star.
  void set_reference(double j_star);
};

/// sup of |g| over the validation points of X x U.
double sup_abs_cost(const ocp::OcpProblem& p);

/// T with e^{-lambda T} sup|g| / lambda <= tail_tol.
double horizon_for(const ocp::OcpProblem& p, double tail_tol);

/// Classical RK4 with the control held over each step; the discounted cost
/// is integrated as an extra state. Aborts if the state leaves the box of X
/// enlarged twice about its centre.
ClosedLoopReport simulate_closed_loop(const ocp::OcpProblem& p, const ControlFn& law, std::span<const double> x0,
                                      const SimOptions& opts = {});
ClosedLoopReport simulate_closed_loop(const ocp::OcpProblem& p, const FeedbackLaw& law, std::span<const double> x0,
                                      const SimOptions& opts = {});

struct SynthesisOptions {
  int r = 3;
  double rho = 0.25;
  int budget = 50;  // maximal number of averaged-dual solves
  SimOptions sim;
  std::vector<int> ugrid;
  relax::RelaxationOptions relax;
};

/// Initial measure for the averaged dual on S = B(center, rho) intersected
/// with X: uniform on X when S = X; for a ball X the largest ball inside S;
/// otherwise B(center, rho') with rho' halved until it lies in X, and a
/// Dirac mass if that fails.
ocp::InitialMeasure neighborhood_measure(const ocp::OcpProblem& p, std::span<const double> center, double rho);

/// Receding neighbourhood scheme: solve the averaged dual on a neighbourhood
/// of the current state, apply its feedback until the state is farther than
/// rho from the neighbourhood centre, repeat. When the solve budget runs out
/// the last law is kept to the horizon and the report is flagged.
ClosedLoopReport iterative_synthesis(const ocp::OcpProblem& p, std::span<const double> x0,
                                     const SynthesisOptions& opts, const sdp::ConicBackend& backend,
                                     const sdp::SolverOptions& solver = {});

/// Header `t,x1..xn,u1..um,running_cost`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace momentctl::control
