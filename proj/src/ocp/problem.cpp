#include "momentctl/ocp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "momentctl/errors.hpp"
#include "momentctl/sampling.hpp"

namespace momentctl::ocp {

InitialMeasure InitialMeasure::dirac(std::vector<double> x0) {
  InitialMeasure m;
  m.kind = Kind::kDirac;
  m.point = std::move(x0);
  return m;
}

InitialMeasure InitialMeasure::uniform_box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size()) throw InputError("uniform_box: lo and hi differ in dimension");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(hi[i] >= lo[i])) throw InputError("uniform_box: hi must be >= lo in every coordinate");
  }
  InitialMeasure m;
  m.kind = Kind::kUniformBox;
  m.lo = std::move(lo);
  m.hi = std::move(hi);
  return m;
}

InitialMeasure InitialMeasure::uniform_ball(std::vector<double> center, double radius) {
  if (!(radius >= 0.0)) throw InputError("uniform_ball: radius must be nonnegative");
  InitialMeasure m;
  m.kind = Kind::kUniformBall;
  m.point = std::move(center);
  m.radius = radius;
  return m;
}

int InitialMeasure::dimension() const {
  return static_cast<int>(kind == Kind::kUniformBox ? lo.size() : point.size());
}

std::vector<std::vector<double>> InitialMeasure::support_samples(int count) const {
  const int n = dimension();
  std::vector<std::vector<double>> pts;
  switch (kind) {
    case Kind::kDirac:
      pts.push_back(point);
      break;
    case Kind::kUniformBox: {
      for (auto& h : halton_points(n, count)) {
        for (int i = 0; i < n; ++i) h[i] = lo[i] + (hi[i] - lo[i]) * h[i];
        pts.push_back(std::move(h));
      }
      if (n <= 10) {
        for (int mask = 0; mask < (1 << n); ++mask) {
          std::vector<double> c(n);
          for (int i = 0; i < n; ++i) c[i] = (mask >> i) & 1 ? hi[i] : lo[i];
          pts.push_back(std::move(c));
        }
      }
      break;
    }
    case Kind::kUniformBall: {
      // Interior points by rejection from the cube, boundary points by
      // projecting cube points onto the sphere.
      std::uint64_t skip = 0;
      const int interior = count - count / 4;
      while (static_cast<int>(pts.size()) < interior) {
        for (auto& h : halton_points(n, 256, skip)) {
          double r2 = 0.0;
          for (auto& v : h) {
            v = 2.0 * v - 1.0;
            r2 += v * v;
          }
          if (r2 <= 1.0 && static_cast<int>(pts.size()) < interior) pts.push_back(std::move(h));
        }
        skip += 256;
      }
      for (auto& h : halton_points(n, count / 4, skip)) {
        double r2 = 0.0;
        for (auto& v : h) {
          v = 2.0 * v - 1.0;
          r2 += v * v;
        }
        if (r2 < 1e-12) continue;
        for (auto& v : h) v /= std::sqrt(r2);
        pts.push_back(std::move(h));
      }
      for (int i = 0; i < n; ++i) {
        for (double s : {-1.0, 1.0}) {
          std::vector<double> e(n, 0.0);
          e[i] = s;
          pts.push_back(std::move(e));
        }
      }
      for (auto& p : pts) {
        for (int i = 0; i < n; ++i) p[i] = point[i] + radius * p[i];
      }
      break;
    }
  }
  return pts;
}

namespace {

// Moment of the uniform probability measure on the centred unit ball in R^n.
double unit_ball_moment(std::span<const int> beta) {
  const int n = static_cast<int>(beta.size());
  int total = 0;
  for (int b : beta) {
    if (b % 2 != 0) return 0.0;
    total += b;
  }
  // integral over the ball: 2 prod Gamma((b_i+1)/2) / ((|b|+n) Gamma((|b|+n)/2));
  // volume: pi^(n/2) / Gamma(n/2 + 1).
  double log_int = std::log(2.0) - std::log(static_cast<double>(total + n)) -
                   std::lgamma(0.5 * (total + n));
  for (int b : beta) log_int += std::lgamma(0.5 * (b + 1));
  const double log_vol = 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0);
  return std::exp(log_int - log_vol);
}

double binomial(int a, int b) {
  double r = 1.0;
  for (int k = 1; k <= b; ++k) r = r * (a - b + k) / k;
  return r;
}

}  // namespace

double initial_moment(const InitialMeasure& meas, const MultiIndex& alpha) {
  const int n = meas.dimension();
  if (static_cast<int>(alpha.size()) != n) {
    throw InputError("initial_moment: multi-index has " + std::to_string(alpha.size()) +
                     " entries, measure dimension is " + std::to_string(n));
  }
  switch (meas.kind) {
    case InitialMeasure::Kind::kDirac: {
      double v = 1.0;
      for (int i = 0; i < n; ++i) v *= std::pow(meas.point[i], alpha[i]);
      return v;
    }
    case InitialMeasure::Kind::kUniformBox: {
      double v = 1.0;
      for (int i = 0; i < n; ++i) {
        const double lo = meas.lo[i], hi = meas.hi[i];
        const int a = alpha[i];
        if (hi == lo) {
          v *= std::pow(lo, a);
        } else {
          v *= (std::pow(hi, a + 1) - std::pow(lo, a + 1)) / ((a + 1) * (hi - lo));
        }
      }
      return v;
    }
    case InitialMeasure::Kind::kUniformBall: {
      // x = c + rho*y with y uniform on the unit ball; expand binomially.
      MultiIndex beta(n);
      double sum = 0.0;
      while (true) {
        double w = unit_ball_moment(beta.exponents());
        if (w != 0.0) {
          for (int i = 0; i < n; ++i) {
            w *= binomial(alpha[i], beta[i]) * std::pow(meas.point[i], alpha[i] - beta[i]);
          }
          sum += w * std::pow(meas.radius, beta.degree());
        }
        int i = 0;
        for (; i < n; ++i) {
          if (beta[i] < alpha[i]) {
            ++beta[i];
            break;
          }
          beta[i] = 0;
        }
        if (i == n) break;
      }
      return sum;
    }
  }
  return 0.0;
}

bool OcpProblem::is_state_constraint(std::size_t i) const { return q.at(i).degree_in(n, m) == 0; }

std::vector<Finding> validate(const OcpProblem& p) {
  std::vector<Finding> out;
  auto error = [&](std::string msg) { out.push_back({Finding::Severity::kError, std::move(msg)}); };
  auto warning = [&](std::string msg) { out.push_back({Finding::Severity::kWarning, std::move(msg)}); };

  if (p.n < 1) error("state dimension n must be >= 1");
  if (p.m < 0) error("input dimension m must be >= 0");
  if (!(p.lambda > 0.0)) error("discount factor must be positive");
  const int nv = p.n + p.m;
  if (static_cast<int>(p.f.size()) != p.n) {
    error("dynamics has " + std::to_string(p.f.size()) + " components, expected n = " + std::to_string(p.n));
  }
  for (std::size_t k = 0; k < p.f.size(); ++k) {
    if (p.f[k].num_vars() != nv) error("dynamics component " + std::to_string(k + 1) + " is not in n+m variables");
  }
  if (p.g.num_vars() != nv) error("cost is not in n+m variables");
  if (p.q.empty()) error("constraint list is empty: X x U must be given by at least one q_i >= 0");
  for (std::size_t i = 0; i < p.q.size(); ++i) {
    if (p.q[i].num_vars() != nv) error("constraint " + std::to_string(i + 1) + " is not in n+m variables");
  }
  if (p.initial.dimension() != p.n) error("initial measure dimension differs from n");
  if (p.initial.kind == InitialMeasure::Kind::kUniformBall && !(p.initial.radius >= 0.0)) {
    error("initial ball radius must be nonnegative");
  }
  if (has_errors(out)) return out;

  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : p.initial.support_samples()) worst = std::min(worst, state_constraint_margin(p, x));
  if (worst < -1e-9) {
    error("initial measure support is not contained in X (state constraint value " + std::to_string(worst) + ")");
  }

  if (!has_archimedean_certificate(p)) {
    warning("no ball-type constraint bounds every variable; Putinar's condition cannot be verified "
            "(use augment_ball)");
  } else {
    const double lip = estimate_lipschitz(p);
    if (p.lambda <= lip) {
      warning("discount factor " + std::to_string(p.lambda) + " does not exceed the sampled Lipschitz bound " +
              std::to_string(lip) + " of f (theory condition only)");
    }
  }
  return out;
}

bool has_errors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Finding::Severity::kError; });
}

OcpProblem augment_ball(const OcpProblem& p, double K) {
  if (!(K > 0.0)) throw InputError("augment_ball: K must be positive");
  const int nv = p.num_vars();
  Polynomial ball = Polynomial::constant(nv, K);
  for (int v = 0; v < nv; ++v) ball.add_term(MultiIndex::unit(nv, v) + MultiIndex::unit(nv, v), -1.0);
  OcpProblem out = p;
  if (std::find(out.q.begin(), out.q.end(), ball) == out.q.end()) out.q.push_back(std::move(ball));
  return out;
}

std::optional<BallShape> as_ball_constraint(const Polynomial& q) {
  BallShape shape{0.0, std::vector<double>(q.num_vars(), 0.0)};
  for (const auto& [alpha, c] : q.terms()) {
    if (alpha.is_zero()) {
      shape.K = c;
      continue;
    }
    if (alpha.degree() != 2 || c >= 0.0) return std::nullopt;
    int var = -1;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[i] == 2) var = static_cast<int>(i);
    }
    if (var < 0) return std::nullopt;
    shape.weights[var] = -c;
  }
  if (!(shape.K > 0.0)) return std::nullopt;
  return shape;
}

bool has_archimedean_certificate(const OcpProblem& p) {
  std::vector<bool> covered(p.num_vars(), false);
  for (const auto& q : p.q) {
    if (auto b = as_ball_constraint(q)) {
      for (std::size_t v = 0; v < covered.size(); ++v) covered[v] = covered[v] || b->weights[v] > 0.0;
    }
  }
  return std::all_of(covered.begin(), covered.end(), [](bool c) { return c; });
}

Box bounding_box(const OcpProblem& p) {
  const int nv = p.num_vars();
  std::vector<double> bound(nv, std::numeric_limits<double>::infinity());
  for (const auto& q : p.q) {
    if (auto b = as_ball_constraint(q)) {
      for (int v = 0; v < nv; ++v) {
        if (b->weights[v] > 0.0) bound[v] = std::min(bound[v], std::sqrt(b->K / b->weights[v]));
      }
    }
  }
  Box box{std::vector<double>(nv), std::vector<double>(nv)};
  const auto names = poly::variable_names(p.n, p.m);
  for (int v = 0; v < nv; ++v) {
    if (!std::isfinite(bound[v])) {
      throw InputError("cannot bound variable " + names[v] + " from the constraints; add a ball constraint");
    }
    box.lo[v] = -bound[v];
    box.hi[v] = bound[v];
  }
  return box;
}

double state_constraint_margin(const OcpProblem& p, std::span<const double> x) {
  std::vector<double> xu(x.begin(), x.end());
  xu.resize(p.num_vars(), 0.0);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.q.size(); ++i) {
    if (p.is_state_constraint(i)) worst = std::min(worst, p.q[i].evaluate(xu));
  }
  return worst;
}

double constraint_margin(const OcpProblem& p, std::span<const double> xu) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& q : p.q) worst = std::min(worst, q.evaluate(xu));
  return worst;
}

std::optional<double> state_set_ball_radius(const OcpProblem& p) {
  std::optional<double> radius;
  for (std::size_t i = 0; i < p.q.size(); ++i) {
    if (!p.is_state_constraint(i)) continue;
    auto b = as_ball_constraint(p.q[i]);
    if (!b || radius) return std::nullopt;
    const double c = b->weights[0];
    for (int v = 0; v < p.n; ++v) {
      if (b->weights[v] != c) return std::nullopt;
    }
    radius = std::sqrt(b->K / c);
  }
  return radius;
}

double estimate_lipschitz(const OcpProblem& p, int samples) {
  const Box box = bounding_box(p);
  const int nv = p.num_vars();
  std::vector<std::vector<Polynomial>> jac(p.n);
  for (int k = 0; k < p.n; ++k) {
    for (int i = 0; i < p.n; ++i) jac[k].push_back(p.f[k].partial_derivative(i));
  }
  double best = 0.0;
  Eigen::MatrixXd J(p.n, p.n);
  for (auto& h : halton_points(nv, samples)) {
    for (int v = 0; v < nv; ++v) h[v] = box.lo[v] + (box.hi[v] - box.lo[v]) * h[v];
    if (constraint_margin(p, h) < 0.0) continue;
    for (int k = 0; k < p.n; ++k) {
      for (int i = 0; i < p.n; ++i) J(k, i) = jac[k][i].evaluate(h);
    }
    best = std::max(best, Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues()(0));
  }
  return best;
}

}  // namespace momentctl::ocp
