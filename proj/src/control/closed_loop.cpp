#include "momentctl/control/closed_loop.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "momentctl/errors.hpp"
#include "momentctl/relax/certificate.hpp"

namespace momentctl::control {

namespace {

using Vec = std::vector<double>;

class Simulator {
 public:
  enum class Stop { kHorizon, kExit, kAbort };

  Simulator(const ocp::OcpProblem& p, std::span<const double> x0, const SimOptions& opts)
      : p_(p), opts_(opts), x_(x0.begin(), x0.end()) {
    if (static_cast<int>(x0.size()) != p.n) throw InputError("x0 has wrong dimension");
    if (!(opts.dt > 0.0)) throw InputError("dt must be positive");
    if (!(opts.tail_tol > 0.0)) throw InputError("tail_tol must be positive");
    if (opts.record_stride < 1) throw InputError("record stride must be at least 1");
    rep_.horizon = opts.horizon > 0.0 ? opts.horizon : horizon_for(p, opts.tail_tol);
    rep_.truncation_bound = std::exp(-p.lambda * rep_.horizon) * sup_abs_cost(p) / p.lambda;
    steps_ = static_cast<long>(std::ceil(rep_.horizon / opts.dt - 1e-9));
    rep_.trajectory.dt = opts.dt * opts.record_stride;
    try {
      const ocp::Box box = ocp::bounding_box(p);
      for (int i = 0; i < p.n; ++i) {
        const double c = 0.5 * (box.lo[i] + box.hi[i]), h = 0.5 * (box.hi[i] - box.lo[i]);
        abort_lo_.push_back(c - 2.0 * h);
        abort_hi_.push_back(c + 2.0 * h);
      }
    } catch (const InputError&) {
      // No box for X: only non-finite states abort.
    }
    log_violation(x_);
  }

  const Vec& x() const { return x_; }
  double t() const { return static_cast<double>(k_) * opts_.dt; }

  // Steps until the horizon, an abort, or `keep` returning false after a step.
  template <class Keep>
  Stop run(const ControlFn& law, Keep keep) {
    while (k_ < steps_) {
      const Vec u = law(x_);
      if (static_cast<int>(u.size()) != p_.m) throw InputError("control law returned wrong input dimension");
      if (k_ % opts_.record_stride == 0) record(u);
      step(u);
      ++k_;
      log_violation(x_);
      if (escaped()) {
        rep_.aborted = true;
        rep_.message = "state left twice the bounding box of X at t = " + std::to_string(t());
        record(u);
        return Stop::kAbort;
      }
      if (k_ < steps_ && !keep(x_)) return Stop::kExit;
    }
    if (!done_) {
      record(law(x_));
      done_ = true;
    }
    return Stop::kHorizon;
  }

  ClosedLoopReport finish() {
    rep_.V_u = cost_;
    if (rep_.message.empty()) rep_.message = "horizon reached";
    return std::move(rep_);
  }

 private:
  // (dx/dt, d cost/dt) at time t.
  void rhs(double t, const Vec& x, const Vec& u, Vec& dx, double& dc) const {
    Vec xu = x;
    xu.insert(xu.end(), u.begin(), u.end());
    for (int i = 0; i < p_.n; ++i) dx[i] = p_.f[i].evaluate(xu);
    dc = std::exp(-p_.lambda * t) * p_.g.evaluate(xu);
  }

  void step(const Vec& u) {
    const int n = p_.n;
    const double h = opts_.dt, t0 = t();
    Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
    double c1, c2, c3, c4;
    rhs(t0, x_, u, k1, c1);
    for (int i = 0; i < n; ++i) tmp[i] = x_[i] + 0.5 * h * k1[i];
    rhs(t0 + 0.5 * h, tmp, u, k2, c2);
    for (int i = 0; i < n; ++i) tmp[i] = x_[i] + 0.5 * h * k2[i];
    rhs(t0 + 0.5 * h, tmp, u, k3, c3);
    for (int i = 0; i < n; ++i) tmp[i] = x_[i] + h * k3[i];
    rhs(t0 + h, tmp, u, k4, c4);
    for (int i = 0; i < n; ++i) x_[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    cost_ += h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
  }

  void record(const Vec& u) {
    auto& tr = rep_.trajectory;
    tr.t.push_back(t());
    tr.x.push_back(x_);
    tr.u.push_back(u);
    tr.running_cost.push_back(cost_);
  }

  void log_violation(const Vec& x) {
    const double margin = ocp::state_constraint_margin(p_, x);
    if (margin < -opts_.state_tol) {
      auto& v = rep_.violations;
      if (v.count == 0) v.first_time = t();
      ++v.count;
      v.max_depth = std::max(v.max_depth, -margin);
    }
  }

  bool escaped() const {
    for (int i = 0; i < p_.n; ++i) {
      if (!std::isfinite(x_[i])) return true;
      if (!abort_lo_.empty() && (x_[i] < abort_lo_[i] || x_[i] > abort_hi_[i])) return true;
    }
    return !std::isfinite(cost_);
  }

  const ocp::OcpProblem& p_;
  SimOptions opts_;
  Vec x_;
  double cost_ = 0.0;
  long k_ = 0, steps_ = 0;
  bool done_ = false;
  Vec abort_lo_, abort_hi_;
  ClosedLoopReport rep_;
};

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

void ClosedLoopReport::set_reference(double j_star) {
  J_star = j_star;
  gap_percent = 100.0 * (V_u - j_star) / j_star;
}

double sup_abs_cost(const ocp::OcpProblem& p) {
  double sup = 0.0;
  for (const auto& xu : relax::validation_points(p)) sup = std::max(sup, std::fabs(p.g.evaluate(xu)));
  return sup;
}

double horizon_for(const ocp::OcpProblem& p, double tail_tol) {
  const double sup = sup_abs_cost(p);
  if (sup == 0.0) return 0.0;
  return std::max(0.0, std::log(sup / (p.lambda * tail_tol)) / p.lambda);
}

ClosedLoopReport simulate_closed_loop(const ocp::OcpProblem& p, const ControlFn& law, std::span<const double> x0,
                                      const SimOptions& opts) {
  Simulator sim(p, x0, opts);
  sim.run(law, [](const Vec&) { return true; });
  ClosedLoopReport rep = sim.finish();
  return rep;
}

ClosedLoopReport simulate_closed_loop(const ocp::OcpProblem& p, const FeedbackLaw& law, std::span<const double> x0,
                                      const SimOptions& opts) {
  const Controller ctl(p, law);
  return simulate_closed_loop(p, ControlFn([&ctl](std::span<const double> x) { return ctl(x); }), x0, opts);
}

ocp::InitialMeasure neighborhood_measure(const ocp::OcpProblem& p, std::span<const double> center, double rho) {
  if (!(rho > 0.0)) throw InputError("neighbourhood radius must be positive");
  const Vec c(center.begin(), center.end());
  constexpr double kTiny = 1e-9;
  if (const auto R = ocp::state_set_ball_radius(p)) {
    const Vec origin(c.size(), 0.0);
    const double d = distance(c, origin);
    if (rho >= d + *R) return ocp::InitialMeasure::uniform_ball(origin, *R);
    if (d + rho <= *R) return ocp::InitialMeasure::uniform_ball(c, rho);
    // Largest ball in the lens B(c, rho) ∩ B(0, R), centred on the line through 0 and c.
    const double radius = 0.5 * (*R - d + rho);
    if (radius <= kTiny || d == 0.0) return ocp::InitialMeasure::dirac(c);
    Vec mid(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) mid[i] = c[i] / d * 0.5 * (d - rho + *R);
    return ocp::InitialMeasure::uniform_ball(mid, radius);
  }
  for (double radius = rho; radius > kTiny; radius *= 0.5) {
    const auto meas = ocp::InitialMeasure::uniform_ball(c, radius);
    bool inside = true;
    for (const auto& s : meas.support_samples(200)) inside = inside && ocp::state_constraint_margin(p, s) >= 0.0;
    if (inside) return meas;
  }
  return ocp::InitialMeasure::dirac(c);
}

ClosedLoopReport iterative_synthesis(const ocp::OcpProblem& p, std::span<const double> x0,
                                     const SynthesisOptions& opts, const sdp::ConicBackend& backend,
                                     const sdp::SolverOptions& solver) {
  if (opts.budget < 1) throw InputError("synthesis budget must allow at least one solve");
  if (!(opts.rho > 0.0)) throw InputError("neighbourhood radius must be positive");
  Simulator sim(p, x0, opts.sim);
  std::vector<Segment> segments;
  bool wanted_more = false;
  while (true) {
    Segment seg;
    seg.t_start = sim.t();
    seg.center = sim.x();
    seg.measure = neighborhood_measure(p, seg.center, opts.rho);
    ocp::OcpProblem avg = p;
    avg.initial = seg.measure;
    relax::ValueCertificate cert;
    try {
      cert = relax::solve_dual_only(avg, opts.r, backend, solver, opts.relax);
    } catch (const SolverError& e) {
      throw SolverError("synthesis segment " + std::to_string(segments.size()) + ": " + e.what());
    }
    seg.averaged_value = cert.J_star_r;
    FeedbackLaw law = make_law(p, cert.phi, opts.r, "segment " + std::to_string(segments.size()));
    law.ugrid = opts.ugrid;
    const Controller ctl(p, law);
    segments.push_back(std::move(seg));
    const Vec center = segments.back().center;
    const bool last = static_cast<int>(segments.size()) == opts.budget;
    const ControlFn fn = [&ctl](std::span<const double> x) { return ctl(x); };
    const auto stop = sim.run(fn, [&](const Vec& x) {
      if (distance(x, center) <= opts.rho) return true;
      if (last) wanted_more = true;
      return last;
    });
    if (stop != Simulator::Stop::kExit) break;
  }
  ClosedLoopReport rep = sim.finish();
  rep.segments = std::move(segments);
  if (wanted_more) {
    rep.budget_exhausted = true;
    rep.message = "solve budget exhausted after " + std::to_string(rep.segments.size()) +
                  " segments; last law kept to the horizon";
  }
  return rep;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.x.empty() ? 0 : traj.x.front().size();
  const std::size_t m = traj.u.empty() ? 0 : traj.u.front().size();
  os << 't';
  for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= m; ++i) os << ",u" << i;
  os << ",running_cost\n";
  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    put(traj.t[k]);
    for (double v : traj.x[k]) os << ',', put(v);
    for (double v : traj.u[k]) os << ',', put(v);
    os << ',';
    put(traj.running_cost[k]);
    os << '\n';
  }
}

}  // namespace momentctl::control
