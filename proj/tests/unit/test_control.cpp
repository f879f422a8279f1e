#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "momentctl/control/closed_loop.hpp"
#include "momentctl/errors.hpp"
#include "momentctl/poly/generator.hpp"
#include "momentctl/poly/parse.hpp"
#include "momentctl/relax/certificate.hpp"
#include "test_support.hpp"

namespace momentctl::control {
namespace {

Polynomial phi_of(std::string_view text) { return poly::parse_polynomial(text, 2, 0); }

// g(x,u) - (A phi)(x,u), evaluated directly.
double lagrangian(const ocp::OcpProblem& p, const Polynomial& phi, std::span<const double> x, double u) {
  const std::vector<double> xu = {x[0], x[1], u};
  return p.g.evaluate(xu) - poly::apply_generator(phi, p.f, p.lambda).evaluate(xu);
}

ocp::OcpProblem static_problem(std::string_view cost) {
  auto p = testing::double_integrator();
  p.f = poly::PolynomialVector({poly::parse_polynomial("0", 2, 1), poly::parse_polynomial("0", 2, 1)});
  p.g = poly::parse_polynomial(cost, 2, 1);
  return p;
}

const ControlFn kZero = [](std::span<const double>) { return std::vector<double>{0.0}; };

TEST(SignLaw, Examples) {
  const auto p = testing::double_integrator();
  const double up[2] = {0.0, 0.7}, down[2] = {0.0, -0.7};
  EXPECT_EQ(sign_law_control(p, phi_of("x2^2"), up), 1.0);
  EXPECT_EQ(sign_law_control(p, phi_of("x2^2"), down), -1.0);
  EXPECT_EQ(sign_law_control(p, phi_of("x1^2 + 3"), up), -1.0);
}

TEST(SignLaw, Admissibility) {
  const auto p = testing::double_integrator();
  EXPECT_FALSE(sign_law_inadmissible(p).has_value());
  auto q = p;
  q.f = poly::PolynomialVector({poly::parse_polynomial("x2", 2, 1), poly::parse_polynomial("-0.3*u1^2", 2, 1)});
  EXPECT_TRUE(sign_law_inadmissible(q).has_value());
  auto g = p;
  g.g = poly::parse_polynomial("x1^2 + u1^2", 2, 1);
  EXPECT_TRUE(sign_law_inadmissible(g).has_value());
  auto none = p;
  none.f = poly::PolynomialVector({poly::parse_polynomial("x2", 2, 1), poly::parse_polynomial("-x1", 2, 1)});
  EXPECT_TRUE(sign_law_inadmissible(none).has_value());
  const double x[2] = {0.0, 0.5};
  EXPECT_THROW(sign_law_control(q, phi_of("x2^2"), x), InputError);
  EXPECT_EQ(make_law(q, phi_of("x2^2")).kind, FeedbackLaw::Kind::kPointwiseArgmin);
  EXPECT_EQ(make_law(p, phi_of("x2^2")).kind, FeedbackLaw::Kind::kSignLaw);
}

TEST(PointwiseControl, Examples) {
  const auto p = testing::double_integrator();
  const double x[2] = {0.0, 0.7};
  // u-coefficient of g - A phi is -0.3 * 2 * 0.7 = -0.42, so the upper end wins.
  EXPECT_EQ(pointwise_control(p, phi_of("x2^2"), x), std::vector<double>({1.0}));
  // g does not depend on u: every grid point ties and the smallest is kept.
  EXPECT_EQ(pointwise_control(p, phi_of("5"), x), std::vector<double>({-1.0}));
  EXPECT_THROW(pointwise_control(p, phi_of("x2^2"), x, {0}), InputError);
  EXPECT_EQ(default_ugrid(1), std::vector<int>({201}));
  EXPECT_EQ(default_ugrid(2), std::vector<int>({201, 201}));
  EXPECT_EQ(default_ugrid(3), std::vector<int>({21, 21, 21}));
}

TEST(PointwiseControl, MatchesSignLawOnRandomSamples) {
  const auto p = testing::double_integrator();
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int compared = 0;
  for (int t = 0; t < 1000; ++t) {
    Polynomial phi(2);
    for (const auto& a : poly::monomials_up_to(2, 4)) phi.add_term(a, U(rng));
    double x[2];
    do {
      x[0] = U(rng);
      x[1] = U(rng);
    } while (x[0] * x[0] + x[1] * x[1] > 1.0);
    const double coef = -0.3 * phi.partial_derivative(1).evaluate(x);
    if (std::fabs(coef) < 1e-12) continue;
    ++compared;
    EXPECT_EQ(pointwise_control(p, phi, x)[0], sign_law_control(p, phi, x));
  }
  EXPECT_GT(compared, 990);
}

TEST(PointwiseControl, GridRefinementNeverWorse) {
  auto p = testing::double_integrator();
  p.g = poly::parse_polynomial("x1^2 + x2^2 + 0.4*u1^2 - 0.1*u1", 2, 1);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> U(-0.7, 0.7);
  for (int t = 0; t < 200; ++t) {
    Polynomial phi(2);
    for (const auto& a : poly::monomials_up_to(2, 3)) phi.add_term(a, U(rng));
    const double x[2] = {U(rng), U(rng)};
    const double coarse = pointwise_control(p, phi, x, {51})[0];
    const double fine = pointwise_control(p, phi, x, {101})[0];
    EXPECT_LE(lagrangian(p, phi, x, fine), lagrangian(p, phi, x, coarse) + 1e-15);
  }
}

TEST(PointwiseControl, RespectsInputConstraints) {
  auto p = testing::double_integrator();
  p.q[1] = poly::parse_polynomial("(0.5 - u1)*(1 + u1)", 2, 1);  // U = [-1, 0.5]
  p.q.push_back(poly::parse_polynomial("2 - x1^2 - x2^2 - u1^2", 2, 1));
  const double x[2] = {0.0, 0.7};
  // The grid spans the bounding box [-sqrt 2, sqrt 2] of u; the best
  // admissible node is the last one below 0.5.
  const double u = pointwise_control(p, phi_of("x2^2"), x)[0];
  EXPECT_LE(u, 0.5);
  EXPECT_GT(u, 0.5 - 2 * std::sqrt(2.0) / 200);
}

TEST(Simulate, StaticZeroCostRay) {
  const auto p = static_problem("x1^2");
  const std::vector<double> x0 = {0.0, 0.7};
  const auto rep = simulate_closed_loop(p, kZero, x0);
  EXPECT_EQ(rep.V_u, 0.0);
  EXPECT_FALSE(rep.aborted);
}

TEST(Simulate, StaticConstantCost) {
  const auto p = static_problem("x2^2");
  const std::vector<double> x0 = {0.0, 0.7};
  const auto rep = simulate_closed_loop(p, kZero, x0);
  // int_0^T e^{-0.1 t} 0.49 dt = 4.9 (1 - e^{-0.1 T}).
  const double t_end = rep.trajectory.t.back();
  EXPECT_GE(t_end, rep.horizon);
  EXPECT_NEAR(rep.V_u, 4.9 * (1 - std::exp(-0.1 * t_end)), 1e-10);
  EXPECT_NEAR(rep.V_u, 4.9, rep.truncation_bound + 1e-10);
  EXPECT_LE(rep.truncation_bound, 1e-4 * (1 + 1e-12));
}

TEST(Simulate, HorizonFromTailTolerance) {
  const auto p = testing::double_integrator();
  EXPECT_NEAR(sup_abs_cost(p), 1.0, 1e-12);
  EXPECT_NEAR(horizon_for(p, 1e-4), 10.0 * std::log(1.0 / (0.1 * 1e-4)), 1e-9);
  EXPECT_NEAR(horizon_for(p, 1e-4), 115.129, 1e-3);
}

TEST(Simulate, LinearDecayMatchesClosedForm) {
  // x' = -x, g = x^2, lambda = 1: V(x0) = x0^2 / 3.
  const auto p = ocp::parse_problem(R"J({"n":1,"m":0,"lambda":1,"dynamics":["-x1"],"cost":"x1^2",
      "constraints":["1 - x1^2"],"initial":{"kind":"dirac","x0":[0.6]}})J");
  const ControlFn none = [](std::span<const double>) { return std::vector<double>{}; };
  const std::vector<double> x0 = {0.6};
  const auto rep = simulate_closed_loop(p, none, x0, {.dt = 0.01});
  EXPECT_NEAR(rep.V_u, 0.12, 1e-4);
  const auto fine = simulate_closed_loop(p, none, x0, {.dt = 0.005});
  // Fourth order: halving dt cuts the error by about 16.
  EXPECT_LT(std::fabs(fine.V_u - 0.12 * (1 - std::exp(-3 * fine.horizon))), 1e-11);
}

TEST(Simulate, TrajectoryInvariants) {
  const auto p = testing::double_integrator();
  const std::vector<double> x0 = {0.0, 0.7};
  const ControlFn law = [](std::span<const double> x) {
    return std::vector<double>{std::clamp(2.0 * x[0] + 3.0 * x[1], -1.0, 1.0)};
  };
  const auto rep = simulate_closed_loop(p, law, x0, {.record_stride = 10});
  const auto& tr = rep.trajectory;
  ASSERT_GT(tr.t.size(), 100u);
  EXPECT_DOUBLE_EQ(tr.dt, 0.01);
  for (std::size_t k = 1; k < tr.t.size(); ++k) {
    EXPECT_NEAR(tr.t[k] - tr.t[k - 1], 0.01, 1e-9);
    EXPECT_GE(tr.running_cost[k], tr.running_cost[k - 1]);
  }
  EXPECT_NEAR(tr.t.back(), rep.horizon, 1e-3);
  EXPECT_EQ(rep.violations.count, 0);
  EXPECT_DOUBLE_EQ(tr.running_cost.back(), rep.V_u);
}

TEST(Simulate, ViolationsLoggedAndEscapeAborts) {
  const auto p = testing::double_integrator();
  const std::vector<double> x0 = {0.0, 0.7};
  // u = -1 pushes x2 upwards out of the disk.
  const ControlFn push = [](std::span<const double>) { return std::vector<double>{-1.0}; };
  const auto rep = simulate_closed_loop(p, push, x0);
  EXPECT_GT(rep.violations.count, 0);
  EXPECT_GT(rep.violations.max_depth, 0.0);
  EXPECT_LT(rep.violations.first_time, 2.0);
  EXPECT_TRUE(rep.aborted);
  EXPECT_NE(rep.message.find("bounding box"), std::string::npos);
}

TEST(Simulate, InputErrors) {
  const auto p = testing::double_integrator();
  const std::vector<double> x0 = {0.0, 0.7}, bad = {0.0};
  EXPECT_THROW(simulate_closed_loop(p, kZero, bad), InputError);
  EXPECT_THROW(simulate_closed_loop(p, kZero, x0, {.dt = 0.0}), InputError);
  EXPECT_THROW(simulate_closed_loop(p, kZero, x0, {.tail_tol = -1.0}), InputError);
  const ControlFn wrong = [](std::span<const double>) { return std::vector<double>{0.0, 0.0}; };
  EXPECT_THROW(simulate_closed_loop(p, wrong, x0), InputError);
}

TEST(Report, GapDefinition) {
  ClosedLoopReport rep;
  rep.V_u = 2.2479;
  rep.set_reference(2.2043);
  EXPECT_NEAR(rep.gap_percent, 100.0 * (2.2479 - 2.2043) / 2.2043, 1e-12);
}

TEST(Report, CsvHeaderAndRows) {
  Trajectory tr;
  tr.t = {0.0, 0.5};
  tr.x = {{0.0, 0.7}, {0.1, 0.6}};
  tr.u = {{1.0}, {-1.0}};
  tr.running_cost = {0.0, 0.25};
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  EXPECT_EQ(os.str(), "t,x1,x2,u1,running_cost\n0,0,0.7,1,0\n0.5,0.1,0.6,-1,0.25\n");
}

TEST(Neighborhood, BallCases) {
  const auto p = testing::double_integrator();
  const std::vector<double> origin = {0.0, 0.0}, inner = {0.2, 0.1}, edge = {0.0, 0.9};
  const auto whole = neighborhood_measure(p, origin, 5.0);
  EXPECT_EQ(whole.kind, ocp::InitialMeasure::Kind::kUniformBall);
  EXPECT_DOUBLE_EQ(whole.radius, 1.0);
  const auto in = neighborhood_measure(p, inner, 0.25);
  EXPECT_EQ(in.point, inner);
  EXPECT_DOUBLE_EQ(in.radius, 0.25);
  // B(edge, 0.25) sticks out of the disk; the largest inscribed ball of the
  // lens has radius (1 - 0.9 + 0.25)/2 centred at 0.9 - 0.25 + radius.
  const auto lens = neighborhood_measure(p, edge, 0.25);
  EXPECT_NEAR(lens.radius, 0.175, 1e-12);
  EXPECT_NEAR(lens.point[1], 0.825, 1e-12);
  EXPECT_NEAR(lens.point[0], 0.0, 1e-15);
  for (const auto& s : lens.support_samples(300)) EXPECT_GE(ocp::state_constraint_margin(p, s), -1e-12);
  EXPECT_THROW(neighborhood_measure(p, inner, 0.0), InputError);
}

TEST(IterativeSynthesis, BudgetZeroRejected) {
  const auto p = testing::double_integrator();
  sdp::InteriorPointBackend backend;
  SynthesisOptions so;
  so.budget = 0;
  const std::vector<double> x0 = {0.0, 0.7};
  EXPECT_THROW(iterative_synthesis(p, x0, so, backend), InputError);
}

TEST(IterativeSynthesis, WholeSetNeighbourhoodEqualsGlobalLaw) {
  const auto p = testing::double_integrator();
  sdp::InteriorPointBackend backend;
  const std::vector<double> x0 = {0.0, 0.7};
  SynthesisOptions so;
  so.r = 2;
  so.rho = 3.0;
  so.sim.dt = 1e-2;
  const auto it = iterative_synthesis(p, x0, so, backend);
  EXPECT_EQ(it.segments.size(), 1u);
  EXPECT_FALSE(it.budget_exhausted);
  auto avg = p;
  avg.initial = ocp::InitialMeasure::uniform_ball({0.0, 0.0}, 1.0);
  const auto cert = relax::solve_dual_only(avg, 2, backend);
  const auto global = simulate_closed_loop(p, make_law(p, cert.phi, 2), x0, so.sim);
  EXPECT_EQ(it.V_u, global.V_u);
  EXPECT_EQ(it.trajectory.x.back(), global.trajectory.x.back());
}

TEST(IterativeSynthesis, BudgetExhaustionIsFlagged) {
  const auto p = testing::double_integrator();
  sdp::InteriorPointBackend backend;
  const std::vector<double> x0 = {0.0, 0.7};
  SynthesisOptions so;
  so.r = 2;
  so.rho = 0.05;
  so.budget = 2;
  so.sim.dt = 1e-2;
  const auto rep = iterative_synthesis(p, x0, so, backend);
  EXPECT_EQ(rep.segments.size(), 2u);
  EXPECT_TRUE(rep.budget_exhausted);
  EXPECT_NEAR(rep.trajectory.t.back(), rep.horizon, 1e-2);
  EXPECT_GT(rep.segments[1].t_start, 0.0);
  for (const auto& s : rep.segments) EXPECT_TRUE(std::isfinite(s.averaged_value));
}

}  // namespace
}  // namespace momentctl::control
