#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "momentctl/errors.hpp"
#include "momentctl/ocp/problem_io.hpp"
#include "momentctl/poly/multi_index.hpp"
#include "momentctl/poly/parse.hpp"
#include "test_support.hpp"

namespace momentctl::ocp {
namespace {

using poly::MultiIndex;

bool mentions(const std::vector<Finding>& fs, Finding::Severity sev, std::string_view text) {
  for (const auto& f : fs) {
    if (f.severity == sev && f.message.find(text) != std::string::npos) return true;
  }
  return false;
}

TEST(Validate, DoubleIntegratorHasNoErrors) {
  const auto fs = validate(testing::double_integrator());
  EXPECT_FALSE(has_errors(fs));
}

TEST(Validate, NegativeDiscount) {
  auto p = testing::double_integrator();
  p.lambda = -1.0;
  EXPECT_TRUE(mentions(validate(p), Finding::Severity::kError, "discount factor must be positive"));
}

TEST(Validate, EmptyConstraints) {
  auto p = testing::double_integrator();
  p.q.clear();
  EXPECT_TRUE(has_errors(validate(p)));
}

TEST(Validate, InitialPointOutsideX) {
  auto p = testing::double_integrator();
  p.initial = InitialMeasure::dirac({0.9, 0.9});
  EXPECT_TRUE(mentions(validate(p), Finding::Severity::kError, "not contained in X"));
}

TEST(Validate, MissingBallIsWarningOnly) {
  auto p = testing::double_integrator();
  p.q = {poly::parse_polynomial("1 - x1^2 - x2^2", 2, 1)};
  const auto fs = validate(p);
  EXPECT_FALSE(has_errors(fs));
  EXPECT_TRUE(mentions(fs, Finding::Severity::kWarning, "Putinar"));
}

TEST(AugmentBall, AppendsAndIsIdempotent) {
  const auto p = testing::double_integrator();
  const auto a = augment_ball(p, 2.0);
  ASSERT_EQ(a.q.size(), p.q.size() + 1);
  EXPECT_EQ(a.q.back(), poly::parse_polynomial("2 - x1^2 - x2^2 - u1^2", 2, 1));
  EXPECT_EQ(augment_ball(a, 2.0).q.size(), a.q.size());
  EXPECT_FALSE(has_errors(validate(a)));
  EXPECT_THROW(augment_ball(p, 0.0), InputError);
}

TEST(AugmentBall, GivesArchimedeanCertificate) {
  auto p = testing::double_integrator();
  p.q = {poly::parse_polynomial("x1", 2, 1)};
  EXPECT_FALSE(has_archimedean_certificate(p));
  EXPECT_TRUE(has_archimedean_certificate(augment_ball(p, 3.0)));
}

TEST(InitialMoment, Examples) {
  EXPECT_NEAR(initial_moment(InitialMeasure::dirac({0, 0.7}), MultiIndex({0, 2})), 0.49, 1e-15);
  const std::vector<InitialMeasure> all = {InitialMeasure::dirac({0.2, -0.1}),
                                           InitialMeasure::uniform_box({-1, 0}, {0.5, 2}),
                                           InitialMeasure::uniform_ball({0.1, 0.3}, 0.4)};
  for (const auto& m : all) EXPECT_NEAR(initial_moment(m, MultiIndex({0, 0})), 1.0, 1e-14);
  // Polar coordinates: (1/pi) int_0^1 r^3 dr int_0^{2 pi} cos^2 = 1/4.
  EXPECT_NEAR(initial_moment(InitialMeasure::uniform_ball({0, 0}, 1.0), MultiIndex({2, 0})), 0.25, 1e-14);
  EXPECT_THROW(initial_moment(InitialMeasure::dirac({0, 0}), MultiIndex({1})), InputError);
}

TEST(InitialMoment, BoxClosedForm) {
  const auto m = InitialMeasure::uniform_box({-1, 0.5}, {2, 1.5});
  // (2^3 - (-1)^3) / (3*3) = 1 for x1^2; (1.5^2 - 0.5^2) / 2 = 1 for x2.
  EXPECT_NEAR(initial_moment(m, MultiIndex({2, 0})), 1.0, 1e-14);
  EXPECT_NEAR(initial_moment(m, MultiIndex({2, 1})), 1.0, 1e-14);
}

TEST(InitialMoment, CenteredBallOddMomentsVanishExactly) {
  const auto m = InitialMeasure::uniform_ball({0, 0, 0}, 0.8);
  for (const auto& a : poly::monomials_up_to(3, 7)) {
    bool odd = false;
    for (int e : a.exponents()) odd = odd || (e % 2 == 1);
    if (odd) EXPECT_EQ(initial_moment(m, a), 0.0);
  }
}

// Fixed-seed Monte Carlo estimate within 3 standard errors, |alpha| <= 6.
TEST(InitialMoment, MonteCarloOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int samples = 400000;
  const auto check = [&](const InitialMeasure& m, auto draw) {
    const auto basis = poly::monomials_up_to(2, 6);
    std::vector<double> sum(basis.size(), 0.0), sumsq(basis.size(), 0.0);
    for (int s = 0; s < samples; ++s) {
      const auto x = draw();
      for (std::size_t k = 0; k < basis.size(); ++k) {
        const double v = std::pow(x[0], basis[k][0]) * std::pow(x[1], basis[k][1]);
        sum[k] += v;
        sumsq[k] += v * v;
      }
    }
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const double mean = sum[k] / samples;
      const double se = std::sqrt(std::max(0.0, sumsq[k] / samples - mean * mean) / samples);
      EXPECT_NEAR(initial_moment(m, basis[k]), mean, 3.0 * se + 1e-12);
    }
  };
  check(InitialMeasure::uniform_box({-0.5, 0.2}, {1.0, 0.9}),
        [&] { return std::array<double, 2>{-0.5 + 1.5 * U(rng), 0.2 + 0.7 * U(rng)}; });
  check(InitialMeasure::uniform_ball({0.3, -0.2}, 0.6), [&] {
    while (true) {
      const double a = 2 * U(rng) - 1, b = 2 * U(rng) - 1;
      if (a * a + b * b <= 1.0) return std::array<double, 2>{0.3 + 0.6 * a, -0.2 + 0.6 * b};
    }
  });
}

TEST(ProblemIo, JsonRoundTrip) {
  const auto p = testing::double_integrator();
  const auto q = problem_from_json(problem_to_json(p));
  EXPECT_EQ(q.n, p.n);
  EXPECT_EQ(q.m, p.m);
  EXPECT_EQ(q.lambda, p.lambda);
  EXPECT_EQ(q.g, p.g);
  EXPECT_EQ(q.q, p.q);
  for (std::size_t k = 0; k < p.f.size(); ++k) EXPECT_EQ(q.f[k], p.f[k]);
  EXPECT_EQ(q.initial.point, p.initial.point);
}

TEST(ProblemIo, MeasureKinds) {
  for (const auto& m : {InitialMeasure::dirac({1, 2}), InitialMeasure::uniform_box({0, 0}, {1, 2}),
                        InitialMeasure::uniform_ball({0.5, 0.5}, 0.25)}) {
    const auto back = measure_from_json(measure_to_json(m));
    EXPECT_EQ(back.kind, m.kind);
    EXPECT_EQ(back.point, m.point);
    EXPECT_EQ(back.lo, m.lo);
    EXPECT_EQ(back.hi, m.hi);
    EXPECT_EQ(back.radius, m.radius);
  }
}

TEST(ProblemIo, Errors) {
  EXPECT_THROW(parse_problem("{"), ParseError);
  EXPECT_THROW(parse_problem(R"({"n":2})"), InputError);
  EXPECT_THROW(parse_problem(R"J({"n":1,"m":0,"lambda":1,"dynamics":["y"],"cost":"1",
                                  "constraints":["1 - x^2"],"initial":{"kind":"dirac","x0":[0]}})J"),
               ParseError);
  EXPECT_THROW(measure_from_json(nlohmann::json{{"kind", "gaussian"}}), InputError);
  EXPECT_THROW(load_problem("/nonexistent/problem.json"), InputError);
}

TEST(Geometry, BoxBallAndMargins) {
  const auto p = testing::double_integrator();
  const Box b = bounding_box(p);
  EXPECT_EQ(b.lo, std::vector<double>({-1, -1, -1}));
  EXPECT_EQ(b.hi, std::vector<double>({1, 1, 1}));
  ASSERT_TRUE(state_set_ball_radius(p).has_value());
  EXPECT_DOUBLE_EQ(*state_set_ball_radius(p), 1.0);
  const double x[2] = {0.6, 0.0};
  EXPECT_NEAR(state_constraint_margin(p, x), 0.64, 1e-15);
  const double xu[3] = {0.0, 0.0, 1.5};
  EXPECT_NEAR(constraint_margin(p, xu), -1.25, 1e-15);
  EXPECT_TRUE(p.is_state_constraint(0));
  EXPECT_FALSE(p.is_state_constraint(1));
}

}  // namespace
}  // namespace momentctl::ocp
