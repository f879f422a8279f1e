#include "momentctl/control/feedback.hpp"

#include <limits>
#include <map>

#include "momentctl/errors.hpp"
#include "momentctl/poly/generator.hpp"
#include "momentctl/sampling.hpp"

namespace momentctl::control {

namespace {

bool involves_input(const Polynomial& q, int n, int m) { return q.degree_in(n, m) > 0; }
bool involves_state(const Polynomial& q, int n) { return q.degree_in(0, n) > 0; }

std::vector<double> concat(std::span<const double> x, std::span<const double> u) {
  std::vector<double> xu(x.begin(), x.end());
  xu.insert(xu.end(), u.begin(), u.end());
  return xu;
}

}  // namespace

std::vector<int> default_ugrid(int m) { return std::vector<int>(static_cast<std::size_t>(m), m <= 2 ? 201 : 21); }

std::optional<std::string> sign_law_inadmissible(const ocp::OcpProblem& p) {
  if (p.m != 1) return "sign law needs exactly one input (m = " + std::to_string(p.m) + ")";
  int deg_u = 0;
  for (const auto& fk : p.f.components()) deg_u = std::max(deg_u, fk.degree_in(p.n, 1));
  if (deg_u != 1) return "sign law needs dynamics affine in u (deg_u f = " + std::to_string(deg_u) + ")";
  if (p.g.degree_in(p.n, 1) != 0) return "sign law needs a cost independent of u";
  for (const auto& q : p.q) {
    if (involves_input(q, p.n, p.m) && involves_state(q, p.n)) return "input constraints depend on the state";
  }
  return std::nullopt;
}

FeedbackLaw make_law(const ocp::OcpProblem& p, const Polynomial& phi, int r, std::string source) {
  FeedbackLaw law;
  law.kind = sign_law_inadmissible(p) ? FeedbackLaw::Kind::kPointwiseArgmin : FeedbackLaw::Kind::kSignLaw;
  law.phi = phi;
  law.r = r;
  law.source = std::move(source);
  return law;
}

Controller::Controller(const ocp::OcpProblem& p, const FeedbackLaw& law) : kind_(law.kind), n_(p.n), m_(p.m) {
  if (law.phi.num_vars() != p.n) {
    throw InputError("phi must be a polynomial in the " + std::to_string(p.n) + " state variables");
  }
  if (p.m == 0) {
    throw InputError("problem has no inputs");
  }
  const ocp::Box box = ocp::bounding_box(p);
  std::vector<double> ulo(box.lo.begin() + p.n, box.lo.end()), uhi(box.hi.begin() + p.n, box.hi.end());
  const Polynomial lagr = p.g - poly::apply_generator(law.phi, p.f, p.lambda);

  if (kind_ == FeedbackLaw::Kind::kSignLaw) {
    if (auto why = sign_law_inadmissible(p)) throw InputError(*why);
    switching_ = lagr.partial_derivative(p.n);
    lo_ = ulo[0];
    hi_ = uhi[0];
    for (const auto& q : p.q) {
      if (!involves_input(q, p.n, p.m)) continue;
      std::vector<double> at_lo(static_cast<std::size_t>(p.n), 0.0), at_hi = at_lo;
      at_lo.push_back(lo_);
      at_hi.push_back(hi_);
      if (q.evaluate(at_lo) < -1e-12 || q.evaluate(at_hi) < -1e-12) {
        throw InputError("input set is not the interval [" + std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
      }
    }
    return;
  }

  // Split g - A phi by the u part of each exponent.
  std::map<MultiIndex, Polynomial, poly::GradedLexLess> groups;
  for (const auto& [alpha, c] : lagr.terms()) {
    MultiIndex beta(static_cast<std::size_t>(p.m));
    MultiIndex xa(static_cast<std::size_t>(p.n));
    for (int v = 0; v < p.n; ++v) xa[v] = alpha[v];
    for (int v = 0; v < p.m; ++v) beta[v] = alpha[p.n + v];
    auto [it, inserted] = groups.try_emplace(beta, Polynomial(p.n));
    it->second.add_term(xa, c);
  }
  for (auto& [beta, coef] : groups) {
    u_powers_.push_back(beta);
    u_coefs_.push_back(std::move(coef));
  }

  const std::vector<int> pts = law.ugrid.empty() ? default_ugrid(p.m) : law.ugrid;
  if (static_cast<int>(pts.size()) != p.m) throw InputError("u-grid needs one point count per input");
  for (int k : pts) {
    if (k < 1) throw InputError("u-grid point counts must be positive");
  }
  std::vector<Polynomial> input_only;
  for (const auto& q : p.q) {
    if (!involves_input(q, p.n, p.m)) continue;
    (involves_state(q, p.n) ? mixed_ : input_only).push_back(q);
  }
  const std::vector<double> zeros(static_cast<std::size_t>(p.n), 0.0);
  for (auto& u : tensor_grid(ulo, uhi, pts)) {
    const auto xu = concat(zeros, u);
    bool ok = true;
    for (const auto& q : input_only) ok = ok && q.evaluate(xu) >= 0.0;
    if (ok) grid_.push_back(std::move(u));
  }
  if (grid_.empty()) throw InputError("u-grid has no point inside U");
}

std::vector<double> Controller::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_) throw InputError("state has wrong dimension");
  if (kind_ == FeedbackLaw::Kind::kSignLaw) return {sign_law(x)};
  return argmin(x);
}

double Controller::sign_law(std::span<const double> x) const {
  const std::vector<double> xu = concat(x, std::vector<double>{0.0});
  return switching_.evaluate(xu) < 0.0 ? hi_ : lo_;
}

std::vector<double> Controller::argmin(std::span<const double> x) const {
  std::vector<double> coef(u_coefs_.size());
  for (std::size_t k = 0; k < u_coefs_.size(); ++k) coef[k] = u_coefs_[k].evaluate(x);
  double best = std::numeric_limits<double>::infinity();
  const std::vector<double>* best_u = nullptr;
  for (const auto& u : grid_) {
    if (!mixed_.empty()) {
      const auto xu = concat(x, u);
      bool ok = true;
      for (const auto& q : mixed_) ok = ok && q.evaluate(xu) >= 0.0;
      if (!ok) continue;
    }
    double val = 0.0;
    for (std::size_t k = 0; k < u_powers_.size(); ++k) {
      double mono = coef[k];
      for (int v = 0; v < m_; ++v) {
        for (int e = 0; e < u_powers_[k][v]; ++e) mono *= u[v];
      }
      val += mono;
    }
    if (val < best) {
      best = val;
      best_u = &u;
    }
  }
  if (best_u == nullptr) throw InputError("no admissible input on the u-grid at this state");
  return *best_u;
}

std::vector<double> pointwise_control(const ocp::OcpProblem& p, const Polynomial& phi, std::span<const double> x,
                                      const std::vector<int>& ugrid) {
  FeedbackLaw law;
  law.kind = FeedbackLaw::Kind::kPointwiseArgmin;
  law.phi = phi;
  law.ugrid = ugrid;
  return Controller(p, law)(x);
}

double sign_law_control(const ocp::OcpProblem& p, const Polynomial& phi, std::span<const double> x) {
  FeedbackLaw law;
  law.kind = FeedbackLaw::Kind::kSignLaw;
  law.phi = phi;
  return Controller(p, law)(x).front();
}

}  // namespace momentctl::control
