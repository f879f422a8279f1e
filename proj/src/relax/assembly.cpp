#include "momentctl/relax/assembly.hpp"

#include <algorithm>
#include <string>

#include "momentctl/errors.hpp"
#include "momentctl/poly/generator.hpp"

namespace momentctl::relax {

namespace {

void normalize(LinearForm& lf) {
  std::sort(lf.begin(), lf.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  LinearForm out;
  out.reserve(lf.size());
  for (const auto& [k, v] : lf) {
    if (!out.empty() && out.back().first == k) {
      out.back().second += v;
    } else {
      out.emplace_back(k, v);
    }
  }
  std::erase_if(out, [](const auto& e) { return e.second == 0.0; });
  lf = std::move(out);
}

LinearForm as_form(const Polynomial& poly, const MomentIndexMap& index) {
  LinearForm lf;
  lf.reserve(poly.num_terms());
  for (const auto& [alpha, c] : poly.terms()) lf.emplace_back(index.position(alpha), c);
  normalize(lf);
  return lf;
}

Eigen::VectorXd as_vector(const Polynomial& poly, const MomentIndexMap& index) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(index.size());
  for (const auto& [alpha, c] : poly.terms()) v(index.position(alpha)) = c;
  return v;
}

LocalizingBlock make_block(int constraint, const Polynomial& weight, int d, const MomentIndexMap& index) {
  LocalizingBlock blk;
  blk.constraint = constraint;
  blk.weight = weight;
  blk.basis = poly::monomials_up_to(index.num_vars(), d);
  const int s = blk.side();
  blk.lower.reserve(static_cast<std::size_t>(s) * (s + 1) / 2);
  for (int j = 0; j < s; ++j) {
    for (int i = j; i < s; ++i) {
      const MultiIndex base = blk.basis[i] + blk.basis[j];
      LinearForm lf;
      lf.reserve(weight.num_terms());
      for (const auto& [c, w] : weight.terms()) lf.emplace_back(index.position(base + c), w);
      normalize(lf);
      blk.lower.push_back(std::move(lf));
    }
  }
  return blk;
}

std::vector<LocalizingBlock> make_blocks(const ocp::OcpProblem& p, int r, const MomentIndexMap& index) {
  std::vector<LocalizingBlock> blocks;
  blocks.push_back(make_block(-1, Polynomial::constant(p.num_vars(), 1.0), r, index));
  for (std::size_t i = 0; i < p.q.size(); ++i) {
    blocks.push_back(make_block(static_cast<int>(i), p.q[i], r - half_degree(p.q[i]), index));
  }
  return blocks;
}

void require_usable(const ocp::OcpProblem& p) {
  for (const auto& f : ocp::validate(p)) {
    if (f.severity == ocp::Finding::Severity::kError) throw InputError(f.message);
  }
}

void require_order(int r, int minimum) {
  if (r < minimum) {
    throw InputError("relaxation order " + std::to_string(r) + " is below the minimum order " +
                     std::to_string(minimum));
  }
}

}  // namespace

int half_degree(const Polynomial& q) { return (q.degree() + 1) / 2; }

int min_order(const ocp::OcpProblem& p) {
  int r = std::max(1, half_degree(p.g));
  for (const auto& q : p.q) r = std::max(r, half_degree(q));
  return r;
}

std::vector<MultiIndex> equality_indices(const ocp::OcpProblem& p, int r, const RelaxationOptions& opts) {
  std::vector<MultiIndex> out;
  const int excess = std::max(0, p.f.degree() - 1);
  for (const auto& alpha : poly::monomials_up_to(p.n, 2 * r)) {
    bool keep = false;
    if (opts.equality_set == EqualitySet::kDegreeBound) {
      keep = alpha.is_zero() || alpha.degree() + excess <= 2 * r;
    } else {
      keep = poly::h_alpha(alpha, p.f, p.lambda).degree() <= 2 * r;
    }
    if (keep) out.push_back(alpha);
  }
  return out;
}

MomentSdp assemble_primal(const ocp::OcpProblem& p, int r, const RelaxationOptions& opts) {
  require_usable(p);
  require_order(r, min_order(p));
  MomentSdp sdp;
  sdp.r = r;
  sdp.index = MomentIndexMap(p.num_vars(), r);
  sdp.objective = as_vector(p.g, sdp.index);
  for (const auto& alpha : equality_indices(p, r, opts)) {
    MomentSdp::Equality eq;
    eq.alpha = alpha;
    eq.row = as_form(poly::h_alpha(alpha, p.f, p.lambda), sdp.index);
    eq.rhs = ocp::initial_moment(p.initial, alpha);
    sdp.equalities.push_back(std::move(eq));
  }
  sdp.blocks = make_blocks(p, r, sdp.index);
  return sdp;
}

SosProgram assemble_dual(const ocp::OcpProblem& p, int r, const RelaxationOptions& opts) {
  require_usable(p);
  require_order(r, min_order(p));
  SosProgram sos;
  sos.r = r;
  sos.index = MomentIndexMap(p.num_vars(), r);
  sos.phi_basis = equality_indices(p, r, opts);
  sos.weights.resize(static_cast<Eigen::Index>(sos.phi_basis.size()));
  for (std::size_t k = 0; k < sos.phi_basis.size(); ++k) {
    const auto& alpha = sos.phi_basis[k];
    sos.columns.push_back(as_form(poly::h_alpha(alpha, p.f, p.lambda), sos.index));
    sos.weights(static_cast<Eigen::Index>(k)) = ocp::initial_moment(p.initial, alpha);
  }
  sos.rhs = as_vector(p.g, sos.index);
  sos.gram_blocks = make_blocks(p, r, sos.index);
  return sos;
}

int min_certification_order(const ocp::OcpProblem& p, const Polynomial& phi) {
  if (phi.num_vars() != p.n) {
    throw InputError("phi must be a polynomial in the " + std::to_string(p.n) + " state variables");
  }
  const Polynomial slack = p.g - poly::apply_generator(phi, p.f, p.lambda);
  return std::max(min_order(p), half_degree(slack));
}

SosProgram assemble_certification(const ocp::OcpProblem& p, const Polynomial& phi, int r) {
  require_usable(p);
  require_order(r, min_certification_order(p, phi));
  SosProgram sos;
  sos.r = r;
  sos.index = MomentIndexMap(p.num_vars(), r);
  sos.columns.push_back(LinearForm{{0, 1.0}});
  sos.weights = Eigen::VectorXd::Ones(1);
  sos.rhs = as_vector(p.g - poly::apply_generator(phi, p.f, p.lambda), sos.index);
  sos.gram_blocks = make_blocks(p, r, sos.index);
  return sos;
}

Polynomial phi_from_coefficients(int n, const std::vector<MultiIndex>& basis, const Eigen::VectorXd& lambda) {
  if (static_cast<Eigen::Index>(basis.size()) != lambda.size()) {
    throw InputError("coefficient vector does not match the phi basis");
  }
  Polynomial phi(n);
  for (std::size_t k = 0; k < basis.size(); ++k) phi.add_term(basis[k], lambda(static_cast<Eigen::Index>(k)));
  return phi;
}

}  // namespace momentctl::relax
