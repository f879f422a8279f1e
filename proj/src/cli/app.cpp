#include "momentctl/cli/app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "momentctl/control/closed_loop.hpp"
#include "momentctl/errors.hpp"
#include "momentctl/ocp/problem_io.hpp"
#include "momentctl/poly/parse.hpp"
#include "momentctl/relax/certificate.hpp"
#include "momentctl/relax/conic_form.hpp"
#include "momentctl/sdp/sdpa.hpp"

#ifndef MOMENTCTL_SDPA_SCRIPT
#define MOMENTCTL_SDPA_SCRIPT "tools/sdpa_clarabel.py"
#endif

namespace momentctl::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using poly::MultiIndex;
using poly::Polynomial;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// NaN and infinities become null.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

relax::RelaxationOptions relax_options(const RunConfig& cfg) {
  relax::RelaxationOptions o;
  if (cfg.equality_set == "degree-bound") {
    o.equality_set = relax::EqualitySet::kDegreeBound;
  } else if (cfg.equality_set == "exact") {
    o.equality_set = relax::EqualitySet::kExactDegree;
  } else {
    throw InputError("unknown equality set '" + cfg.equality_set + "'");
  }
  return o;
}

sdp::SolverOptions solver_options(const RunConfig& cfg) {
  sdp::SolverOptions o;
  if (!(cfg.tol > 0.0)) throw InputError("--tol must be positive");
  if (cfg.max_iter < 1) throw InputError("--max-iter must be positive");
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  if (cfg.direction == "nt") {
    o.direction = sdp::SearchDirection::kNT;
  } else if (cfg.direction == "hkm") {
    o.direction = sdp::SearchDirection::kHKM;
  } else {
    throw InputError("unknown search direction '" + cfg.direction + "'");
  }
  return o;
}

std::unique_ptr<sdp::ConicBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend == "internal") return std::make_unique<sdp::InteriorPointBackend>();
  if (cfg.backend == "sdpa-file") return std::make_unique<sdp::SdpaFileBackend>(cfg.sdpa_command);
  throw InputError("unknown backend '" + cfg.backend + "'");
}

void require_orders(const RunConfig& cfg) {
  if (cfg.orders.empty()) throw InputError("empty relaxation order range");
}

json multi_index_json(const MultiIndex& a) { return json(std::vector<int>(a.exponents().begin(), a.exponents().end())); }

json side_json(const relax::SideReport& s) {
  return {{"status", sdp::to_string(s.status)},
          {"iterations", s.iterations},
          {"seconds", s.seconds},
          {"residuals", {{"primal", jnum(s.residuals.primal)}, {"dual", jnum(s.residuals.dual)}, {"gap", jnum(s.residuals.gap)}}},
          {"message", s.message}};
}

std::string phi_string(const Polynomial& phi, int n) {
  const auto names = poly::variable_names(n, 0);
  return phi.to_string(names);
}

class Outputs {
 public:
  explicit Outputs(const RunConfig& cfg) : dir_(cfg.out) { fs::create_directories(dir_); }
  void write(const std::string& name, std::string_view content) {
    write_atomic(dir_ / name, content);
    files_.push_back(name);
  }
  void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }
  void manifest(const RunConfig& cfg, const ocp::OcpProblem& p) {
    json m = {{"tool", "momentctl"}, {"config", cfg.to_json()}, {"problem", ocp::problem_to_json(p)}, {"outputs", files_}};
    write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

json layout_json(const relax::ConicLayout& layout, const relax::MomentIndexMap& index, const std::vector<MultiIndex>& free,
                 const std::vector<relax::LocalizingBlock>& blocks) {
  json rows = json::array(), fr = json::array(), bl = json::array();
  for (int k = 0; k < index.size(); ++k) rows.push_back(multi_index_json(index[k]));
  for (const auto& a : free) fr.push_back(multi_index_json(a));
  for (std::size_t k = 0; k < layout.blocks.size(); ++k) {
    json basis = json::array();
    for (const auto& b : blocks[k].basis) basis.push_back(multi_index_json(b));
    bl.push_back({{"constraint", layout.blocks[k].constraint},
                  {"offset", layout.blocks[k].offset},
                  {"side", layout.blocks[k].side},
                  {"basis", basis}});
  }
  return {{"rows", rows}, {"free_offset", layout.free_offset}, {"free", fr}, {"blocks", bl}};
}

ocp::OcpProblem load_checked(const fs::path& path) {
  ocp::OcpProblem p = ocp::load_problem(path);
  std::string errors;
  for (const auto& f : ocp::validate(p)) {
    if (f.severity == ocp::Finding::Severity::kWarning) {
      std::cerr << "warning: " << f.message << "\n";
    } else {
      errors += (errors.empty() ? "" : "; ") + f.message;
    }
  }
  if (!errors.empty()) throw InputError("invalid problem: " + errors);
  return p;
}

ocp::InitialMeasure resolve_mu0(const RunConfig& cfg, const ocp::OcpProblem& p) {
  if (cfg.mu0 == "problem") return p.initial;
  if (cfg.mu0 == "uniform-x") {
    if (const auto R = ocp::state_set_ball_radius(p)) {
      return ocp::InitialMeasure::uniform_ball(std::vector<double>(static_cast<std::size_t>(p.n), 0.0), *R);
    }
    throw InputError("X is not a centred ball; pass --mu0 with an explicit measure");
  }
  json doc;
  try {
    doc = json::parse(cfg.mu0);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("--mu0: ") + e.what());
  }
  return ocp::measure_from_json(doc);
}

}  // namespace

json RunConfig::to_json() const {
  json j = {{"command", command},
            {"problem", problem.string()},
            {"orders", orders},
            {"backend", backend},
            {"sdpa_command", sdpa_command},
            {"tol", tol},
            {"max_iter", max_iter},
            {"direction", direction},
            {"equality_set", equality_set},
            {"dt", dt},
            {"tail_tol", tail_tol},
            {"rho", rho},
            {"ugrid", ugrid},
            {"out", out.string()},
            {"seed", seed},
            {"phi_file", phi_file.string()},
            {"mu0", mu0},
            {"iterative", iterative},
            {"budget", budget},
            {"jstar", jstar ? json(*jstar) : json(nullptr)},
            {"ref_order", ref_order},
            {"record_stride", record_stride}};
  return j;
}

std::vector<int> parse_orders(std::string_view text) {
  const auto to_int = [&](std::string_view s) {
    int v = 0;
    std::size_t used = 0;
    try {
      v = std::stoi(std::string(s), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw InputError("bad relaxation order '" + std::string(s) + "'");
    return v;
  };
  std::vector<int> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const int a = to_int(text.substr(0, dots)), b = to_int(text.substr(dots + 2));
    for (int r = a; r <= b; ++r) out.push_back(r);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!piece.empty()) out.push_back(to_int(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw InputError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

int cmd_relax(const RunConfig& cfg) {
  require_orders(cfg);
  const ocp::OcpProblem p = load_checked(cfg.problem);
  const auto ropts = relax_options(cfg);
  Outputs out(cfg);
  for (int r : cfg.orders) {
    const relax::MomentSdp primal = relax::assemble_primal(p, r, ropts);
    const relax::SosProgram dual = relax::assemble_dual(p, r, ropts);
    const auto pc = relax::to_conic(primal);
    const auto dc = relax::to_conic(dual);
    std::vector<MultiIndex> alphas;
    for (const auto& eq : primal.equalities) alphas.push_back(eq.alpha);
    out.write("moment_r" + std::to_string(r) + ".dat-s", sdp::export_sdpa(pc.problem));
    out.write("sos_r" + std::to_string(r) + ".dat-s", sdp::export_sdpa(dc.problem));
    json idx = {{"r", r},
                {"variables", poly::variable_names(p.n, p.m)},
                {"moment", layout_json(pc.layout, primal.index, alphas, primal.blocks)},
                {"sos", layout_json(dc.layout, dual.index, dual.phi_basis, dual.gram_blocks)}};
    out.write_json("index_r" + std::to_string(r) + ".json", idx);
    std::cout << "r=" << r << ": moment block side " << primal.blocks.front().side() << ", "
              << pc.problem.num_rows() << " rows, " << pc.problem.num_vars() << " variables\n";
  }
  out.manifest(cfg, p);
  return kOk;
}

int cmd_solve(const RunConfig& cfg) {
  require_orders(cfg);
  const ocp::OcpProblem p = load_checked(cfg.problem);
  const auto ropts = relax_options(cfg);
  const auto sopts = solver_options(cfg);
  const auto backend = make_backend(cfg);
  Outputs out(cfg);
  std::string table = "r,J_r,J_star_r,primal_status,dual_status,cpu_seconds\n";
  bool solver_failed = false, input_failed = false;
  for (int r : cfg.orders) {
    try {
      const relax::ValueCertificate c = relax::solve_order(p, r, *backend, sopts, ropts);
      json doc = {{"r", r},
                  {"J_r", jnum(c.J_r)},
                  {"J_star_r", jnum(c.J_star_r)},
                  {"phi", phi_string(c.phi, p.n)},
                  {"residual_max", jnum(c.residual_max)},
                  {"mass", jnum(c.mass)},
                  {"solver",
                   {{"backend", backend->name()}, {"tol", sopts.tol}, {"primal", side_json(c.primal)}, {"dual", side_json(c.dual)}}}};
      out.write_json("certificate_r" + std::to_string(r) + ".json", doc);
      table += std::to_string(r) + "," + num(c.J_r) + "," + num(c.J_star_r) + "," + sdp::to_string(c.primal.status) +
               "," + sdp::to_string(c.dual.status) + "," + num(c.primal.seconds + c.dual.seconds) + "\n";
      std::cout << "r=" << r << "  J_r=" << num(c.J_r) << "  J*_r=" << num(c.J_star_r) << "  ("
                << sdp::to_string(c.primal.status) << "/" << sdp::to_string(c.dual.status) << ")\n";
    } catch (const SolverError& e) {
      solver_failed = true;
      table += std::to_string(r) + ",,,failed,failed,\n";
      std::cerr << "r=" << r << ": " << e.what() << "\n";
    } catch (const InputError& e) {
      input_failed = true;
      table += std::to_string(r) + ",,,rejected,rejected,\n";
      std::cerr << "r=" << r << ": " << e.what() << "\n";
    }
  }
  out.write("table.csv", table);
  out.manifest(cfg, p);
  if (solver_failed) return kSolverFailure;
  return input_failed ? kInputError : kOk;
}

int cmd_certify(const RunConfig& cfg) {
  const ocp::OcpProblem p = load_checked(cfg.problem);
  if (cfg.orders.size() > 1) throw InputError("certify takes a single order");
  std::string text;
  {
    std::ifstream f(cfg.phi_file);
    if (!f) throw InputError("cannot read " + cfg.phi_file.string());
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("phi file: ") + e.what());
    }
    if (!doc.contains("phi") || !doc["phi"].is_string()) throw InputError("phi file has no \"phi\" string");
    text = doc["phi"].get<std::string>();
  }
  const Polynomial phi = poly::parse_polynomial(text, p.n, 0);
  const int r = cfg.orders.empty() ? relax::min_certification_order(p, phi) : cfg.orders.front();
  const auto backend = make_backend(cfg);
  const relax::CertifyReport rep = relax::certify(p, phi, r, *backend, solver_options(cfg));
  Outputs out(cfg);
  out.write_json("certify.json", {{"r", rep.r},
                                  {"accepted", rep.accepted},
                                  {"reason", rep.reason},
                                  {"margin", jnum(rep.margin)},
                                  {"residual_max", jnum(rep.residual_max)},
                                  {"threshold", rep.threshold},
                                  {"lower_bound", jnum(rep.lower_bound)},
                                  {"phi", phi_string(phi, p.n)},
                                  {"solver", side_json(rep.solve)}});
  out.manifest(cfg, p);
  std::cout << (rep.accepted ? "certified" : "rejected") << ": " << rep.reason << "  (lower bound "
            << num(rep.lower_bound) << ")\n";
  if (rep.accepted) return kOk;
  const bool solver_trouble = rep.solve.status == sdp::SolveStatus::kError ||
                              rep.solve.status == sdp::SolveStatus::kMaxIter;
  return solver_trouble ? kSolverFailure : kRejected;
}

int cmd_synthesize(const RunConfig& cfg) {
  require_orders(cfg);
  const ocp::OcpProblem p = load_checked(cfg.problem);
  if (p.initial.kind != ocp::InitialMeasure::Kind::kDirac) {
    throw InputError("synthesize simulates from x0: the problem's initial measure must be a Dirac mass");
  }
  const std::vector<double> x0 = p.initial.point;
  const auto ropts = relax_options(cfg);
  const auto sopts = solver_options(cfg);
  const auto backend = make_backend(cfg);
  control::SimOptions sim;
  sim.dt = cfg.dt;
  sim.tail_tol = cfg.tail_tol;
  sim.record_stride = cfg.record_stride;

  double jstar = 0.0;
  if (cfg.jstar) {
    jstar = *cfg.jstar;
  } else {
    jstar = relax::solve_dual_only(p, cfg.ref_order, *backend, sopts, ropts).J_star_r;
  }
  const ocp::InitialMeasure mu0 = cfg.iterative ? p.initial : resolve_mu0(cfg, p);

  Outputs out(cfg);
  std::string gaps = "r,law,V_u,J_star,gap_percent,violations,aborted\n";
  for (int r : cfg.orders) {
    control::ClosedLoopReport rep;
    std::string kind;
    json phi_doc = nullptr;
    double averaged = std::numeric_limits<double>::quiet_NaN();
    if (cfg.iterative) {
      control::SynthesisOptions so;
      so.r = r;
      so.rho = cfg.rho;
      so.budget = cfg.budget;
      so.sim = sim;
      so.ugrid = cfg.ugrid;
      so.relax = ropts;
      rep = control::iterative_synthesis(p, x0, so, *backend, sopts);
      kind = "iterative";
    } else {
      ocp::OcpProblem avg = p;
      avg.initial = mu0;
      const relax::ValueCertificate c = relax::solve_dual_only(avg, r, *backend, sopts, ropts);
      averaged = c.J_star_r;
      control::FeedbackLaw law = control::make_law(p, c.phi, r, "averaged dual");
      law.ugrid = cfg.ugrid;
      rep = control::simulate_closed_loop(p, law, x0, sim);
      kind = law.kind == control::FeedbackLaw::Kind::kSignLaw ? "sign" : "argmin";
      phi_doc = phi_string(c.phi, p.n);
    }
    rep.set_reference(jstar);
    json segs = json::array();
    for (const auto& s : rep.segments) {
      segs.push_back({{"t_start", s.t_start},
                      {"center", s.center},
                      {"measure", ocp::measure_to_json(s.measure)},
                      {"averaged_value", jnum(s.averaged_value)}});
    }
    json doc = {{"r", r},
                {"law", kind},
                {"phi", phi_doc},
                {"averaged_value", jnum(averaged)},
                {"mu0", ocp::measure_to_json(mu0)},
                {"V_u", rep.V_u},
                {"truncation_bound", rep.truncation_bound},
                {"horizon", rep.horizon},
                {"J_star", jnum(rep.J_star)},
                {"gap_percent", jnum(rep.gap_percent)},
                {"violations",
                 {{"count", rep.violations.count},
                  {"max_depth", rep.violations.max_depth},
                  {"first_time", jnum(rep.violations.first_time)}}},
                {"aborted", rep.aborted},
                {"budget_exhausted", rep.budget_exhausted},
                {"message", rep.message},
                {"segments", segs}};
    out.write_json("report_r" + std::to_string(r) + ".json", doc);
    std::ostringstream csv;
    control::write_trajectory_csv(csv, rep.trajectory);
    out.write("trajectory_r" + std::to_string(r) + ".csv", csv.str());
    gaps += std::to_string(r) + "," + kind + "," + num(rep.V_u) + "," + num(jstar) + "," + num(rep.gap_percent) + "," +
            std::to_string(rep.violations.count) + "," + (rep.aborted ? "true" : "false") + "\n";
    std::cout << "r=" << r << "  V_u=" << num(rep.V_u) << "  gap=" << num(rep.gap_percent) << "%  (" << kind
              << (rep.aborted ? ", aborted" : "") << ")\n";
  }
  out.write("gaps.csv", gaps);
  out.manifest(cfg, p);
  return kOk;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Moment-SOS relaxations and feedback synthesis for discounted optimal control"};
  app.require_subcommand(1);
  RunConfig cfg;
  cfg.sdpa_command = std::string("python3 ") + MOMENTCTL_SDPA_SCRIPT + " {in} {out} --tol {tol}";
  std::string order_text, orders_text, ugrid_text;
  std::optional<double> jstar;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--problem", cfg.problem, "problem JSON file")->required();
    auto* o1 = sub->add_option("--order", order_text, "relaxation order");
    auto* o2 = sub->add_option("--orders", orders_text, "order range a..b or list a,b,c");
    o1->excludes(o2);
    sub->add_option("--backend", cfg.backend, "internal or sdpa-file")->check(CLI::IsMember({"internal", "sdpa-file"}));
    sub->add_option("--sdpa-command", cfg.sdpa_command, "external solver command with {in} {out} {tol}");
    sub->add_option("--tol", cfg.tol, "solver tolerance");
    sub->add_option("--max-iter", cfg.max_iter, "solver iteration limit");
    sub->add_option("--direction", cfg.direction, "nt or hkm")->check(CLI::IsMember({"nt", "hkm"}));
    sub->add_option("--equality-set", cfg.equality_set, "degree-bound or exact")
        ->check(CLI::IsMember({"degree-bound", "exact"}));
    sub->add_option("--dt", cfg.dt, "integration step");
    sub->add_option("--tail-tol", cfg.tail_tol, "discounted tail bound fixing the horizon");
    sub->add_option("--rho", cfg.rho, "neighbourhood radius for --iterative");
    sub->add_option("--ugrid", ugrid_text, "u-grid points per input, comma separated");
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--seed", cfg.seed, "seed for sampled checks");
  };
  auto* relax_cmd = app.add_subcommand("relax", "assemble relaxations and export SDPA files");
  auto* solve_cmd = app.add_subcommand("solve", "solve moment and SOS relaxations");
  auto* certify_cmd = app.add_subcommand("certify", "check that a polynomial is a subsolution");
  auto* synth_cmd = app.add_subcommand("synthesize", "build a feedback law and simulate it");
  for (auto* sub : {relax_cmd, solve_cmd, certify_cmd, synth_cmd}) common(sub);
  certify_cmd->add_option("--phi", cfg.phi_file, "polynomial text file or certificate JSON")->required();
  synth_cmd->add_option("--mu0", cfg.mu0, "averaging measure: uniform-x, problem, or a measure JSON object");
  synth_cmd->add_flag("--iterative", cfg.iterative, "receding neighbourhood re-solves");
  synth_cmd->add_option("--budget", cfg.budget, "maximal averaged-dual solves for --iterative");
  synth_cmd->add_option("--jstar", jstar, "reference lower bound for the gap");
  synth_cmd->add_option("--ref-order", cfg.ref_order, "order of the reference lower bound when --jstar is absent");
  synth_cmd->add_option("--record-stride", cfg.record_stride, "keep every k-th trajectory sample");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }
  try {
    cfg.jstar = jstar;
    if (!order_text.empty()) cfg.orders = parse_orders(order_text);
    if (!orders_text.empty()) cfg.orders = parse_orders(orders_text);
    if (!ugrid_text.empty()) {
      std::stringstream ss(ugrid_text);
      for (std::string piece; std::getline(ss, piece, ',');) {
        try {
          cfg.ugrid.push_back(std::stoi(piece));
        } catch (const std::exception&) {
          throw InputError("bad --ugrid entry '" + piece + "'");
        }
      }
    }
    if (relax_cmd->parsed()) {
      cfg.command = "relax";
      return cmd_relax(cfg);
    }
    if (solve_cmd->parsed()) {
      cfg.command = "solve";
      return cmd_solve(cfg);
    }
    if (certify_cmd->parsed()) {
      cfg.command = "certify";
      return cmd_certify(cfg);
    }
    cfg.command = "synthesize";
    return cmd_synthesize(cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
}

}  // namespace momentctl::cli
