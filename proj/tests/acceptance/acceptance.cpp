// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "momentctl/control/closed_loop.hpp"
#include "momentctl/ocp/problem_io.hpp"
#include "momentctl/relax/certificate.hpp"
#include "momentctl/relax/conic_form.hpp"
#include "momentctl/sdp/sdpa.hpp"
#include "momentctl/sdp/solver.hpp"

namespace {

using namespace momentctl;

constexpr const char* kDoubleIntegrator = R"J({"n":2,"m":1,"lambda":0.1,
  "dynamics":["x2 + 0.1*x1^3","-0.3*u1"],"cost":"x1^2 + x2^2",
  "constraints":["1 - x1^2 - x2^2","(1 - u1)*(1 + u1)"],
  "initial":{"kind":"dirac","x0":[0,0.7]}})J";

constexpr double kTol = 1e-8;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Instance {
  std::string name;
  ocp::OcpProblem problem;
  std::vector<relax::ValueCertificate> certs;  // certs[k] is order first_order + k
  int first_order = 2;
};

relax::ValueCertificate solve(const ocp::OcpProblem& p, int r) {
  sdp::InteriorPointBackend backend;
  sdp::SolverOptions o;
  o.tol = kTol;
  return relax::solve_order(p, r, backend, o);
}

bool solved(const relax::ValueCertificate& c) { return sdp::is_solved(c.primal.status) && sdp::is_solved(c.dual.status); }

// Stable random dynamics on the unit ball of R^n with a box on u; the ball
// is invariant under u = 0, so every relaxation is feasible.
ocp::OcpProblem random_instance(std::mt19937& rng, int n, int m) {
  std::uniform_real_distribution<double> quad(-0.1, 0.1), gain(-0.3, 0.3), w(0.2, 1.0), lam(0.8, 1.2);
  const auto var = [](char c, int i) { return std::string(1, c) + std::to_string(i + 1); };
  std::ostringstream doc;
  doc << R"({"n":)" << n << R"(,"m":)" << m << R"(,"lambda":)" << fmt(lam(rng), "%.4f") << R"(,"dynamics":[)";
  for (int i = 0; i < n; ++i) {
    doc << (i ? "," : "") << "\"-" << var('x', i);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) doc << " + " << fmt(quad(rng), "%.4f") << "*" << var('x', a) << "*" << var('x', b);
    for (int k = 0; k < m; ++k) doc << " + " << fmt(gain(rng), "%.4f") << "*" << var('u', k);
    doc << "\"";
  }
  doc << R"(],"cost":")";
  for (int i = 0; i < n; ++i) doc << (i ? " + " : "") << fmt(w(rng), "%.4f") << "*" << var('x', i) << "^2";
  for (int k = 0; k < m; ++k) doc << " + " << fmt(0.5 * w(rng), "%.4f") << "*" << var('u', k) << "^2";
  doc << R"(","constraints":["1)";
  for (int i = 0; i < n; ++i) doc << " - " << var('x', i) << "^2";
  doc << "\"";
  for (int k = 0; k < m; ++k) doc << ",\"(1 - " << var('u', k) << ")*(1 + " << var('u', k) << ")\"";
  std::uniform_real_distribution<double> pos(-0.4, 0.4);
  doc << R"(],"initial":{"kind":"dirac","x0":[)";
  for (int i = 0; i < n; ++i) doc << (i ? "," : "") << fmt(pos(rng), "%.4f");
  doc << "]}}";
  return ocp::parse_problem(doc.str());
}

// Sign-law feedback from the averaged dual on the uniform measure over X.
control::ClosedLoopReport averaged_sign_law(const ocp::OcpProblem& p, int r, const control::SimOptions& sim) {
  ocp::OcpProblem avg = p;
  avg.initial = ocp::InitialMeasure::uniform_ball({0.0, 0.0}, *ocp::state_set_ball_radius(p));
  sdp::InteriorPointBackend backend;
  sdp::SolverOptions o;
  o.tol = kTol;
  const auto c = relax::solve_dual_only(avg, r, backend, o);
  const auto law = control::make_law(p, c.phi, r, "averaged dual");
  return control::simulate_closed_loop(p, law, p.initial.point, sim);
}

int failures = 0;

void report(int id, const std::string& name, Outcome& o) {
  std::printf("%s  [%2d] %s:%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

}  // namespace

int main() {
  const auto t_start = std::chrono::steady_clock::now();

  Instance di{"double integrator", ocp::parse_problem(kDoubleIntegrator), {}, 2};
  double seconds_to_r5 = 0.0;
  for (int r = 2; r <= 7; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    di.certs.push_back(solve(di.problem, r));
    if (r <= 5) seconds_to_r5 += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  std::vector<Instance> randoms;
  {
    std::mt19937 rng(20240601);
    const int shapes[3][2] = {{1, 1}, {2, 1}, {1, 2}};
    for (const auto& s : shapes) {
      Instance inst{"random n=" + std::to_string(s[0]) + " m=" + std::to_string(s[1]),
                    random_instance(rng, s[0], s[1]), {}, 2};
      for (int r = 2; r <= 7; ++r) inst.certs.push_back(solve(inst.problem, r));
      randoms.push_back(std::move(inst));
    }
  }

  // Static problem f = 0, g = x^2: J = x0^2 / lambda at every order.
  Instance oracle_a{"static", ocp::parse_problem(R"J({"n":1,"m":0,"lambda":0.5,"dynamics":["0"],"cost":"x1^2",
      "constraints":["1 - x1^2"],"initial":{"kind":"dirac","x0":[0.6]}})J"), {}, 1};
  for (int r = 1; r <= 5; ++r) oracle_a.certs.push_back(solve(oracle_a.problem, r));
  // x' = -x, g = x^2, lambda = 1: V(x0) = int e^{-t} x0^2 e^{-2t} dt = x0^2 / 3.
  Instance oracle_b{"linear decay", ocp::parse_problem(R"J({"n":1,"m":0,"lambda":1,"dynamics":["-x1"],"cost":"x1^2",
      "constraints":["1 - x1^2"],"initial":{"kind":"dirac","x0":[0.6]}})J"), {}, 1};
  for (int r = 1; r <= 4; ++r) oracle_b.certs.push_back(solve(oracle_b.problem, r));

  std::vector<const Instance*> all = {&di, &oracle_a, &oracle_b};
  for (const auto& inst : randoms) all.push_back(&inst);

  {
    Outcome o;
    const double ref[] = {0.1121, 1.6465, 2.1978, 2.2042, 2.2042, 2.2043};
    for (int k = 0; k < 6; ++k) {
      const int r = k + 2;
      const double tol = r == 2 ? 5e-2 : 5e-3;
      const double J = di.certs[k].J_r;
      o.detail << " J" << r << "=" << fmt(J);
      o.require(std::fabs(J - ref[k]) <= tol, "J" + std::to_string(r) + " vs " + fmt(ref[k]) + " tol " + fmt(tol));
    }
    o.detail << "; r<=5 in " << fmt(seconds_to_r5, "%.1f") << " s";
    o.require(seconds_to_r5 <= 265.0, "runtime r<=5 above 265 s");
    report(1, "reference values, double integrator", o);
  }

  {
    Outcome o;
    for (const Instance* inst : {&di, &randoms[0], &randoms[1], &randoms[2]}) {
      double worst = -INFINITY;
      for (std::size_t k = 0; k + 1 < inst->certs.size(); ++k) {
        const double drop = inst->certs[k].J_r - inst->certs[k + 1].J_r;
        worst = std::max(worst, drop);
        o.require(drop <= 1e-6, inst->name + " J" + std::to_string(inst->first_order + k) + " > J" +
                                    std::to_string(inst->first_order + k + 1));
      }
      o.detail << " " << inst->name << " max(J_r - J_r+1)=" << fmt(worst, "%.2e") << ";";
    }
    report(2, "hierarchy monotonicity r=2..7", o);
  }

  {
    Outcome o;
    double worst = 0.0;
    int count = 0;
    for (const Instance* inst : all) {
      for (const auto& c : inst->certs) {
        ++count;
        o.require(solved(c), inst->name + " r=" + std::to_string(c.r) + " not solved");
        const double d = std::fabs(c.J_r - c.J_star_r);
        worst = std::max(worst, std::isnan(d) ? INFINITY : d);
        o.require(d <= 1e-5, inst->name + " r=" + std::to_string(c.r) + " |J-J*|=" + fmt(d, "%.2e"));
      }
    }
    o.detail << " " << count << " solves, max |J_r - J*_r| = " << fmt(worst, "%.2e");
    report(3, "primal/dual agreement", o);
  }

  {
    Outcome o;
    double worst = 0.0;
    for (const Instance* inst : all) {
      for (const auto& c : inst->certs) {
        const double inv = 1.0 / inst->problem.lambda;
        const double rel = std::fabs(c.mass - inv) / inv;
        worst = std::max(worst, std::isnan(rel) ? INFINITY : rel);
        o.require(rel <= 1e-7, inst->name + " r=" + std::to_string(c.r));
      }
    }
    o.detail << " max |z0 - 1/lambda| lambda = " << fmt(worst, "%.2e");
    report(4, "mass invariant", o);
  }

  {
    Outcome o;
    const double va = 0.36 / 0.5;
    double worst_a = 0.0;
    for (const auto& c : oracle_a.certs) {
      worst_a = std::max(worst_a, std::fabs(c.J_r - va));
      o.require(std::fabs(c.J_r - va) <= 1e-6, "static r=" + std::to_string(c.r));
    }
    const double vb = 0.36 / 3.0;
    o.detail << " static: max err " << fmt(worst_a, "%.2e") << " over r=1..5; decay:";
    for (const auto& c : oracle_b.certs) o.detail << " r" << c.r << " err " << fmt(std::fabs(c.J_r - vb), "%.2e");
    o.require(std::fabs(oracle_b.certs.back().J_r - vb) <= 1e-4, "decay r=4");
    report(5, "analytic oracles", o);
  }

  {
    Outcome o;
    double worst = -INFINITY;
    for (const Instance* inst : all) {
      for (const auto& c : inst->certs) {
        worst = std::max(worst, c.residual_max);
        o.require(c.residual_max <= 1e-6 + kTol, inst->name + " r=" + std::to_string(c.r) + " residual " +
                                                     fmt(c.residual_max, "%.2e"));
      }
    }
    o.detail << " max over grids of (A phi - g) = " << fmt(worst, "%.2e") << " (threshold " << fmt(1e-6 + kTol, "%.2e")
             << ")";
    report(6, "subsolution certificate", o);
  }

  const double jstar7 = di.certs.back().J_star_r;
  {
    Outcome o;
    const double bound = relax::expected_value(di.problem.initial, di.certs.back().phi);
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> K(-4.0, 4.0), K0(-0.5, 0.5);
    int accepted = 0, rejected = 0;
    double lowest = INFINITY;
    while (accepted < 20 && rejected < 500) {
      const double k1 = K(rng), k2 = K(rng), k0 = K0(rng);
      const control::ControlFn law = [=](std::span<const double> x) {
        return std::vector<double>{std::clamp(k0 + k1 * x[0] + k2 * x[1], -1.0, 1.0)};
      };
      const auto rep = control::simulate_closed_loop(di.problem, law, di.problem.initial.point);
      if (rep.aborted || rep.violations.count > 0) {
        ++rejected;
        continue;
      }
      ++accepted;
      lowest = std::min(lowest, rep.V_u);
      o.require(rep.V_u >= bound - 1e-3, "law " + std::to_string(accepted) + " cost " + fmt(rep.V_u));
    }
    o.require(accepted == 20, "only " + std::to_string(accepted) + " admissible laws found");
    o.detail << " " << accepted << " admissible laws (" << rejected << " rejected), lowest cost " << fmt(lowest)
             << " >= phi*_7(x0) = " << fmt(bound);
    report(7, "lower-bound property", o);
  }

  {
    Outcome o;
    const auto r3 = averaged_sign_law(di.problem, 3, {});
    auto rep3 = r3;
    rep3.set_reference(jstar7);
    const auto r4 = averaged_sign_law(di.problem, 4, {});
    o.detail << " V3=" << fmt(r3.V_u) << " G3=" << fmt(rep3.gap_percent, "%.3g") << "% V4=" << fmt(r4.V_u);
    o.require(std::fabs(r3.V_u - 2.2479) <= 0.05 * 2.2479, "V3 not within 5% of 2.2479");
    o.require(rep3.gap_percent >= 1.0 && rep3.gap_percent <= 4.0, "G3 outside [1,4]%");
    o.require(std::fabs(r4.V_u - 2.2582) <= 0.05 * 2.2582, "V4 not within 5% of 2.2582");
    o.require(!r3.aborted && !r4.aborted && r3.violations.count == 0 && r4.violations.count == 0,
              "closed loop left X");

    Outcome n;
    control::SimOptions half;
    half.dt = 5e-4;
    const auto fine = averaged_sign_law(di.problem, 3, half);
    control::SimOptions longer;
    longer.horizon = 2 * r3.horizon;
    const auto lng = averaged_sign_law(di.problem, 3, longer);
    const double d_dt = std::fabs(fine.V_u - r3.V_u), d_T = std::fabs(lng.V_u - r3.V_u);
    n.detail << " |dV| halving dt " << fmt(d_dt, "%.2e") << ", doubling T " << fmt(d_T, "%.2e") << " (T = "
             << fmt(r3.horizon, "%.4g") << ")";
    n.require(d_dt <= 1e-3, "dt halving");
    n.require(d_T <= 1e-4, "horizon doubling");
    report(8, "controller reproduction", o);
    report(9, "simulation numerics", n);
  }

  {
    Outcome o;
    std::mt19937 rng(99);
    std::normal_distribution<double> N;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const int n = 1 + t % 3;
      Eigen::MatrixXd C(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) C(i, j) = N(rng);
      C = 0.5 * (C + C.transpose()).eval();
      // min <C,X> s.t. tr X = 1, X psd equals the smallest eigenvalue of C.
      sdp::ConicProblem p;
      p.c = sdp::svec(C);
      p.cones = {sdp::ConeSegment::psd(n)};
      std::vector<Eigen::Triplet<double>> trip;
      for (int i = 0; i < n; ++i) trip.emplace_back(0, sdp::svec_index(n, i, i), 1.0);
      p.A.resize(1, static_cast<int>(p.c.size()));
      p.A.setFromTriplets(trip.begin(), trip.end());
      p.b = Eigen::VectorXd::Ones(1);
      const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C).eigenvalues()(0);
      sdp::SolverOptions opts;
      opts.tol = 1e-9;
      const auto s = sdp::solve(p, opts);
      const double err = std::fabs(s.primal_objective - lmin);
      worst = std::max(worst, err);
      o.require(s.status == sdp::SolveStatus::kOptimal && err <= 1e-7, "instance " + std::to_string(t));
    }
    int files = 0;
    bool exact = true;
    const auto same = [](const sdp::ConicProblem& a, const sdp::ConicProblem& b) {
      return a.cones == b.cones && a.c.size() == b.c.size() && (a.c.array() == b.c.array()).all() &&
             a.b.size() == b.b.size() && (a.b.array() == b.b.array()).all() &&
             (Eigen::MatrixXd(a.A).array() == Eigen::MatrixXd(b.A).array()).all();
    };
    for (int r = 2; r <= 5; ++r) {
      for (const auto& prob : {relax::to_conic(relax::assemble_primal(di.problem, r)).problem,
                               relax::to_conic(relax::assemble_dual(di.problem, r)).problem}) {
        ++files;
        exact = exact && same(sdp::import_sdpa(sdp::export_sdpa(prob)), prob);
      }
    }
    o.require(exact, "SDPA round trip not exact");
    o.detail << " 50 eigenvalue SDPs, max error " << fmt(worst, "%.2e") << "; " << files
             << " relaxations round-trip through SDPA " << (exact ? "bit-exactly" : "with differences");
    report(10, "solver oracle suite", o);
  }

  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  std::printf("%d of 10 criteria failed (%.1f s)\n", failures, total);
  return failures == 0 ? 0 : 1;
}
