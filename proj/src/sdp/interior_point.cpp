#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "momentctl/errors.hpp"
#include "momentctl/sdp/schur_kernels.hpp"
#include "momentctl/sdp/solver.hpp"

namespace momentctl::sdp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kNearOptimal: return "near_optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kMaxIter: return "max_iter";
    case SolveStatus::kError: return "error";
  }
  return "error";
}

SolveStatus status_from_string(const std::string& s) {
  for (auto st : {SolveStatus::kOptimal, SolveStatus::kNearOptimal, SolveStatus::kInfeasible,
                  SolveStatus::kUnbounded, SolveStatus::kMaxIter, SolveStatus::kError}) {
    if (to_string(st) == s) return st;
  }
  throw InputError("unknown solver status \"" + s + "\"");
}

bool is_solved(SolveStatus s) { return s == SolveStatus::kOptimal || s == SolveStatus::kNearOptimal; }

double Residuals::max() const { return std::max({primal, dual, gap}); }

Residuals compute_residuals(const ConicProblem& prob, const VectorXd& x, const VectorXd& y, const VectorXd& s) {
  Residuals r;
  r.primal = (prob.A * x - prob.b).norm() / (1.0 + prob.b.norm());
  r.dual = (prob.c - prob.A.transpose() * y - s).norm() / (1.0 + prob.c.norm());
  const double pobj = prob.c.dot(x), dobj = prob.b.dot(y);
  r.gap = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj) + std::fabs(dobj));
  return r;
}

namespace {

constexpr double kNearOptimalFactor = 1e3;
constexpr double kCertificateTol = 1e-8;

struct Iterate {
  VectorXd xf, xl, sl, y;
  std::vector<MatrixXd> X, S;
};

struct Direction {
  VectorXd dxf, dxl, dsl, dy;
  std::vector<MatrixXd> dX, dS;
};

// Largest a with X + a*dX positive semidefinite (infinity if unbounded).
double max_step_psd(const MatrixXd& X, const MatrixXd& dX) {
  Eigen::LLT<MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd T = llt.matrixL().solve(dX);
  T = llt.matrixL().solve(T.transpose()).transpose();
  T = 0.5 * (T + T.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(T, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step_nonneg(const VectorXd& x, const VectorXd& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  }
  return a;
}

MatrixXd sym(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

class InteriorPoint {
 public:
  InteriorPoint(const ConicProblem& prob, const SolverOptions& opts) : prob_(prob), opts_(opts) {
    prob.check();
    if (!(opts.tol > 0.0)) throw InputError("solver tolerance must be positive");
    if (opts.max_iter < 1) throw InputError("max_iter must be >= 1");
    setup();
  }

  ConicSolution run();

 private:
  void setup();
  void initial_point();
  VectorXd apply_A(const VectorXd& xf, const VectorXd& xl, const std::vector<MatrixXd>& X) const;
  void factor_schur();
  void solve_bordered(const VectorXd& h, const VectorXd& rf, VectorXd& dy, VectorXd& dxf) const;
  Direction direction(const VectorXd& rp, const VectorXd& rdf, const VectorXd& rdl,
                      const std::vector<MatrixXd>& Rd, const VectorXd& Rcl,
                      const std::vector<MatrixXd>& Rc) const;
  // Primal parts come from px, dual parts from dy.
  ConicSolution finish(const Iterate& px, const Iterate& dy, SolveStatus hint, int iters, std::string msg) const;

  const ConicProblem& prob_;
  SolverOptions opts_;

  int m_ = 0;
  VectorXd row_scale_;
  SparseRowMatrix As_;
  VectorXd bs_;
  std::vector<int> free_idx_, nonneg_idx_;
  struct PsdBlock {
    int offset, side;
  };
  std::vector<PsdBlock> psd_;
  MatrixXd Af_;
  Eigen::SparseMatrix<double> Al_;
  VectorXd cf_, cl_;
  std::vector<MatrixXd> C_;
  std::vector<BlockOperator> ops_;
  double nu_ = 1.0;

  Iterate it_;
  // Per PSD block, D(R) = sym(P R Q) maps a dual change to a primal change:
  // HKM uses P = X, Q = S^{-1}; NT uses P = Q = W with W S W = X. For NT,
  // G satisfies W = G G', G^{-1} X G^{-T} = G' S G = diag(v).
  struct Scaling {
    MatrixXd P, Q, G, Ginv;
    VectorXd v;
  };
  std::vector<Scaling> scal_;
  void compute_scalings();
  MatrixXd corrector_rc(std::size_t k, double target, const MatrixXd& dXa, const MatrixXd& dSa) const;

  // [M Af; Af' 0], LU-factorised.
  MatrixXd schur_matrix_;
  Eigen::PartialPivLU<MatrixXd> aug_;
};

void InteriorPoint::setup() {
  m_ = prob_.num_rows();
  row_scale_.resize(m_);
  for (int r = 0; r < m_; ++r) {
    double mx = 0.0;
    for (SparseRowMatrix::InnerIterator e(prob_.A, r); e; ++e) mx = std::max(mx, std::fabs(e.value()));
    row_scale_(r) = 1.0 / mx;
  }
  As_ = row_scale_.asDiagonal() * prob_.A;
  bs_ = row_scale_.cwiseProduct(prob_.b);

  int offset = 0;
  for (const auto& seg : prob_.cones) {
    switch (seg.kind) {
      case ConeSegment::Kind::kFree:
        for (int k = 0; k < seg.size; ++k) free_idx_.push_back(offset + k);
        break;
      case ConeSegment::Kind::kNonneg:
        for (int k = 0; k < seg.size; ++k) nonneg_idx_.push_back(offset + k);
        break;
      case ConeSegment::Kind::kPsd:
        if (seg.size > 0) psd_.push_back({offset, seg.size});
        break;
    }
    offset += seg.dim();
  }

  Eigen::SparseMatrix<double> colA = As_;
  const int nf = static_cast<int>(free_idx_.size());
  const int nl = static_cast<int>(nonneg_idx_.size());
  Af_ = MatrixXd::Zero(m_, nf);
  cf_.resize(nf);
  for (int k = 0; k < nf; ++k) {
    Af_.col(k) = colA.col(free_idx_[k]);
    cf_(k) = prob_.c(free_idx_[k]);
  }
  Al_.resize(m_, nl);
  std::vector<Eigen::Triplet<double>> trips;
  cl_.resize(nl);
  for (int k = 0; k < nl; ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator e(colA, nonneg_idx_[k]); e; ++e) {
      trips.emplace_back(static_cast<int>(e.row()), k, e.value());
    }
    cl_(k) = prob_.c(nonneg_idx_[k]);
  }
  Al_.setFromTriplets(trips.begin(), trips.end());
  for (const auto& blk : psd_) {
    C_.push_back(smat(prob_.c.segment(blk.offset, blk.side * (blk.side + 1) / 2), blk.side));
    ops_.push_back(make_block_operator(As_, blk.offset, blk.side));
  }
  nu_ = nl;
  for (const auto& blk : psd_) nu_ += blk.side;
  nu_ = std::max(nu_, 1.0);
}

void InteriorPoint::initial_point() {
  const int nf = static_cast<int>(free_idx_.size());
  const int nl = static_cast<int>(nonneg_idx_.size());
  it_.xf = VectorXd::Zero(nf);
  it_.y = VectorXd::Zero(m_);
  // Scaled identities sized from the data.
  for (std::size_t k = 0; k < psd_.size(); ++k) {
    const double s = psd_[k].side;
    double xi = std::max(10.0, std::sqrt(s)), eta = std::max(10.0, std::sqrt(s));
    double max_norm = 0.0;
    for (int r = 0; r < m_; ++r) {
      const double nrm = ops_[k].row_frobenius_norm(r);
      if (nrm == 0.0) continue;
      xi = std::max(xi, s * (1.0 + std::fabs(bs_(r))) / (1.0 + nrm));
      max_norm = std::max(max_norm, nrm);
    }
    eta = std::max({eta, 1.0 + max_norm, 1.0 + C_[k].norm()});
    it_.X.push_back(xi * MatrixXd::Identity(psd_[k].side, psd_[k].side));
    it_.S.push_back(eta * MatrixXd::Identity(psd_[k].side, psd_[k].side));
  }
  double xi = std::max(10.0, std::sqrt(static_cast<double>(nl)));
  double eta = xi;
  for (int k = 0; k < nl; ++k) {
    const double nrm = Al_.col(k).norm();
    eta = std::max(eta, 1.0 + nrm);
  }
  for (int r = 0; r < m_ && nl > 0; ++r) {
    const double nrm = (Al_.transpose() * VectorXd::Unit(m_, r)).norm();
    if (nrm > 0.0) xi = std::max(xi, (1.0 + std::fabs(bs_(r))) / (1.0 + nrm));
  }
  eta = std::max(eta, 1.0 + cl_.norm());
  it_.xl = VectorXd::Constant(nl, xi);
  it_.sl = VectorXd::Constant(nl, eta);
}

VectorXd InteriorPoint::apply_A(const VectorXd& xf, const VectorXd& xl, const std::vector<MatrixXd>& X) const {
  VectorXd out = Af_ * xf + Al_ * xl;
  for (std::size_t k = 0; k < ops_.size(); ++k) ops_[k].apply_add(X[k], out);
  return out;
}

void InteriorPoint::compute_scalings() {
  scal_.resize(psd_.size());
  for (std::size_t k = 0; k < psd_.size(); ++k) {
    const int side = psd_[k].side;
    const MatrixXd I = MatrixXd::Identity(side, side);
    Eigen::LLT<MatrixXd> lx(it_.X[k]), ls(it_.S[k]);
    if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) {
      throw SolverError("iterate left the PSD cone");
    }
    Scaling& sc = scal_[k];
    if (opts_.direction == SearchDirection::kHKM) {
      sc.P = it_.X[k];
      sc.Q = sym(ls.solve(I));
      continue;
    }
    const MatrixXd Lx = lx.matrixL();
    const MatrixXd Ls = ls.matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    sc.v = svd.singularValues();
    if (!(sc.v.minCoeff() > 0.0)) throw SolverError("degenerate scaling point");
    const VectorXd isq = sc.v.cwiseSqrt().cwiseInverse();
    sc.G = Lx * svd.matrixV() * isq.asDiagonal();
    // G^{-1} = diag(sqrt v) V' Lx^{-1}
    const MatrixXd LxInv = lx.matrixL().solve(I);
    sc.Ginv = sc.v.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * LxInv;
    sc.P = sym(sc.G * sc.G.transpose());
    sc.Q = sc.P;
  }
}

MatrixXd InteriorPoint::corrector_rc(std::size_t k, double target, const MatrixXd& dXa, const MatrixXd& dSa) const {
  const Scaling& sc = scal_[k];
  if (opts_.direction == SearchDirection::kHKM) {
    return target * sc.Q - it_.X[k] - sym(dXa * dSa * sc.Q);
  }
  // Scaled complementarity V o (dX~ + dS~) = target I - V^2 - dX~a o dS~a,
  // with A o B = (AB + BA)/2, solved elementwise since V is diagonal.
  const MatrixXd dXs = sc.Ginv * dXa * sc.Ginv.transpose();
  const MatrixXd dSs = sc.G.transpose() * dSa * sc.G;
  MatrixXd rhs = -sym(dXs * dSs);
  const Eigen::Index s = sc.v.size();
  for (Eigen::Index i = 0; i < s; ++i) rhs(i, i) += target - sc.v(i) * sc.v(i);
  MatrixXd R(s, s);
  for (Eigen::Index j = 0; j < s; ++j) {
    for (Eigen::Index i = 0; i < s; ++i) R(i, j) = 2.0 * rhs(i, j) / (sc.v(i) + sc.v(j));
  }
  return sym(sc.G * R * sc.G.transpose());
}

void InteriorPoint::factor_schur() {
  MatrixXd& M = schur_matrix_;
  M.setZero(m_, m_);
  const VectorXd d = it_.xl.cwiseQuotient(it_.sl);
  for (int k = 0; k < Al_.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator a(Al_, k); a; ++a) {
      for (Eigen::SparseMatrix<double>::InnerIterator b(Al_, k); b; ++b) {
        M(a.row(), b.row()) += d(k) * a.value() * b.value();
      }
    }
  }
  for (std::size_t k = 0; k < ops_.size(); ++k) {
    if (opts_.kernel == SchurKernel::kParallel) {
      schur_psd_parallel(ops_[k], scal_[k].P, scal_[k].Q, M);
    } else {
      schur_psd_reference(ops_[k], scal_[k].P, scal_[k].Q, M);
    }
  }
  M = sym(M);
  const int nf = static_cast<int>(Af_.cols());
  MatrixXd K(m_ + nf, m_ + nf);
  K.topLeftCorner(m_, m_) = M;
  K.topRightCorner(m_, nf) = Af_;
  K.bottomLeftCorner(nf, m_) = Af_.transpose();
  K.bottomRightCorner(nf, nf).setZero();
  aug_.compute(K);
}

void InteriorPoint::solve_bordered(const VectorXd& h, const VectorXd& rf, VectorXd& dy, VectorXd& dxf) const {
  const int nf = static_cast<int>(Af_.cols());
  VectorXd rhs(m_ + nf);
  rhs << h, rf;
  VectorXd sol = aug_.solve(rhs);
  // Iterative refinement against the assembled system.
  for (int pass = 0; pass < 2; ++pass) {
    VectorXd res(m_ + nf);
    res.head(m_) = h - schur_matrix_ * sol.head(m_) - Af_ * sol.tail(nf);
    res.tail(nf) = rf - Af_.transpose() * sol.head(m_);
    sol += aug_.solve(res);
  }
  dy = sol.head(m_);
  dxf = sol.tail(nf);
}

Direction InteriorPoint::direction(const VectorXd& rp, const VectorXd& rdf, const VectorXd& rdl,
                                   const std::vector<MatrixXd>& Rd, const VectorXd& Rcl,
                                   const std::vector<MatrixXd>& Rc) const {
  const std::size_t nb = psd_.size();
  const VectorXd d = it_.xl.cwiseQuotient(it_.sl);
  // h = rp - A(Rc) + A(D(Rd)).
  std::vector<MatrixXd> T(nb);
  for (std::size_t k = 0; k < nb; ++k) T[k] = sym(scal_[k].P * Rd[k] * scal_[k].Q) - Rc[k];
  VectorXd h = rp + apply_A(VectorXd::Zero(Af_.cols()), d.cwiseProduct(rdl) - Rcl, T);

  Direction dir;
  solve_bordered(h, rdf, dir.dy, dir.dxf);
  auto expand = [&] {
    dir.dsl = rdl - Al_.transpose() * dir.dy;
    dir.dxl = Rcl - d.cwiseProduct(dir.dsl);
    dir.dS.resize(nb);
    dir.dX.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      dir.dS[k] = Rd[k] - ops_[k].adjoint(dir.dy);
      dir.dX[k] = Rc[k] - sym(scal_[k].P * dir.dS[k] * scal_[k].Q);
    }
  };
  expand();
  // One refinement pass against the operator itself rather than the
  // assembled Schur matrix.
  const VectorXd ep = rp - apply_A(dir.dxf, dir.dxl, dir.dX);
  const VectorXd ef = rdf - Af_.transpose() * dir.dy;
  VectorXd cy, cx;
  solve_bordered(ep, ef, cy, cx);
  dir.dy += cy;
  dir.dxf += cx;
  expand();
  return dir;
}

ConicSolution InteriorPoint::finish(const Iterate& px, const Iterate& dy, SolveStatus hint, int iters,
                                    std::string msg) const {
  ConicSolution sol;
  const int n = prob_.num_vars();
  sol.x = VectorXd::Zero(n);
  sol.s = VectorXd::Zero(n);
  for (std::size_t k = 0; k < free_idx_.size(); ++k) sol.x(free_idx_[k]) = px.xf(k);
  for (std::size_t k = 0; k < nonneg_idx_.size(); ++k) {
    sol.x(nonneg_idx_[k]) = px.xl(k);
    sol.s(nonneg_idx_[k]) = dy.sl(k);
  }
  for (std::size_t k = 0; k < psd_.size(); ++k) {
    const int w = psd_[k].side * (psd_[k].side + 1) / 2;
    sol.x.segment(psd_[k].offset, w) = svec(px.X[k]);
    sol.s.segment(psd_[k].offset, w) = svec(dy.S[k]);
  }
  sol.y = row_scale_.cwiseProduct(dy.y);
  sol.primal_objective = prob_.c.dot(sol.x);
  sol.dual_objective = prob_.b.dot(sol.y);
  sol.residuals = compute_residuals(prob_, sol.x, sol.y, sol.s);
  sol.iterations = iters;
  sol.message = std::move(msg);
  if (hint == SolveStatus::kInfeasible || hint == SolveStatus::kUnbounded) {
    sol.status = hint;
  } else if (sol.residuals.max() <= opts_.tol) {
    sol.status = SolveStatus::kOptimal;
  } else if (sol.residuals.max() <= kNearOptimalFactor * opts_.tol) {
    sol.status = SolveStatus::kNearOptimal;
  } else {
    sol.status = hint == SolveStatus::kOptimal ? SolveStatus::kError : hint;
  }
  return sol;
}

ConicSolution InteriorPoint::run() {
  initial_point();
  const std::size_t nb = psd_.size();
  const double bnorm = prob_.b.norm(), cnorm = prob_.c.norm();

  // Near the end the primal residual can stall at a floor set by the
  // conditioning of the scaled Schur system while the dual iterates keep
  // improving, so the best primal and best dual iterates are kept apart.
  Iterate best_p = it_, best_d = it_;
  double best_pscore = std::numeric_limits<double>::infinity();
  double best_dscore = std::numeric_limits<double>::infinity();
  int since_best = 0, tiny_steps = 0;
  SolveStatus outcome = SolveStatus::kMaxIter;
  std::string message = "iteration limit reached";
  int iter = 0;

  for (; iter < opts_.max_iter; ++iter) {
    // Residuals in the row-scaled problem.
    const VectorXd Ax = apply_A(it_.xf, it_.xl, it_.X);
    const VectorXd rp = bs_ - Ax;
    const VectorXd rdf = cf_ - Af_.transpose() * it_.y;
    const VectorXd rdl = cl_ - Al_.transpose() * it_.y - it_.sl;
    std::vector<MatrixXd> Rd(nb);
    double rd_sq = rdf.squaredNorm() + rdl.squaredNorm();
    double pobj = cf_.dot(it_.xf) + cl_.dot(it_.xl);
    double comp = it_.xl.dot(it_.sl);
    for (std::size_t k = 0; k < nb; ++k) {
      Rd[k] = C_[k] - ops_[k].adjoint(it_.y) - it_.S[k];
      rd_sq += Rd[k].squaredNorm();
      pobj += C_[k].cwiseProduct(it_.X[k]).sum();
      comp += it_.X[k].cwiseProduct(it_.S[k]).sum();
    }
    const double dobj = bs_.dot(it_.y);
    const double mu = comp / nu_;
    const double pinf = rp.cwiseQuotient(row_scale_).norm() / (1.0 + bnorm);
    const double dinf = std::sqrt(rd_sq) / (1.0 + cnorm);
    const double gap = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj) + std::fabs(dobj));
    const double score = std::max({pinf, dinf, gap});
    const double pscore = std::max(pinf, gap), dscore = std::max(dinf, gap);

    if (opts_.verbose) {
      std::fprintf(stderr, "%3d pobj %+.10e dobj %+.10e pinf %.2e dinf %.2e gap %.2e mu %.2e\n", iter, pobj,
                   dobj, pinf, dinf, gap, mu);
    }
    if (!std::isfinite(score)) {
      outcome = SolveStatus::kError;
      message = "non-finite iterate";
      break;
    }
    bool improved = false;
    if (pscore < best_pscore) {
      improved = improved || pscore < 0.5 * best_pscore;
      best_pscore = pscore;
      best_p = it_;
    }
    if (dscore < best_dscore) {
      improved = improved || dscore < 0.5 * best_dscore;
      best_dscore = dscore;
      best_d = it_;
    }
    since_best = improved ? 0 : since_best + 1;
    if (score <= opts_.tol) {
      outcome = SolveStatus::kOptimal;
      message = "converged";
      break;
    }
    // Certificates: a dual ray (primal infeasible) or a primal ray.
    {
      double ray_d = rdf.size() ? (cf_ - rdf).squaredNorm() : 0.0;
      ray_d += (cl_ - rdl).squaredNorm();
      for (std::size_t k = 0; k < nb; ++k) ray_d += (C_[k] - Rd[k]).squaredNorm();
      if (dobj > 0.0 && std::sqrt(ray_d) <= kCertificateTol * dobj) {
        outcome = SolveStatus::kInfeasible;
        message = "dual ray found: primal infeasible";
        best_p = best_d = it_;
        break;
      }
      const double ax_norm = Ax.cwiseQuotient(row_scale_).norm();
      if (pobj < 0.0 && ax_norm <= kCertificateTol * -pobj) {
        outcome = SolveStatus::kUnbounded;
        message = "primal ray found: objective unbounded below";
        best_p = best_d = it_;
        break;
      }
    }
    if (since_best >= 15 || tiny_steps >= 3) {
      outcome = SolveStatus::kError;
      message = "progress stalled";
      break;
    }

    try {
      compute_scalings();
    } catch (const SolverError& e) {
      outcome = SolveStatus::kError;
      message = e.what();
      break;
    }
    try {
      factor_schur();
    } catch (const SolverError& e) {
      outcome = SolveStatus::kError;
      message = e.what();
      break;
    }

    // Predictor (affine scaling) direction.
    std::vector<MatrixXd> Rc(nb);
    for (std::size_t k = 0; k < nb; ++k) Rc[k] = -it_.X[k];
    VectorXd Rcl = -it_.xl;
    Direction aff = direction(rp, rdf, rdl, Rd, Rcl, Rc);

    double ap = max_step_nonneg(it_.xl, aff.dxl), ad = max_step_nonneg(it_.sl, aff.dsl);
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step_psd(it_.X[k], aff.dX[k]));
      ad = std::min(ad, max_step_psd(it_.S[k], aff.dS[k]));
    }
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double comp_aff = (it_.xl + ap * aff.dxl).dot(it_.sl + ad * aff.dsl);
    for (std::size_t k = 0; k < nb; ++k) {
      comp_aff += (it_.X[k] + ap * aff.dX[k]).cwiseProduct(it_.S[k] + ad * aff.dS[k]).sum();
    }
    const double mu_aff = std::max(comp_aff / nu_, 0.0);
    // Short predictor steps call for more centring.
    const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    const double sigma = std::clamp(std::pow(mu_aff / mu, expon), 0.0, 1.0);

    // Corrector.
    for (std::size_t k = 0; k < nb; ++k) {
      Rc[k] = corrector_rc(k, sigma * mu, aff.dX[k], aff.dS[k]);
    }
    Rcl = (VectorXd::Constant(it_.xl.size(), sigma * mu) - it_.xl.cwiseProduct(it_.sl) -
           aff.dxl.cwiseProduct(aff.dsl))
              .cwiseQuotient(it_.sl);
    Direction dir = direction(rp, rdf, rdl, Rd, Rcl, Rc);

    double mp = max_step_nonneg(it_.xl, dir.dxl), md = max_step_nonneg(it_.sl, dir.dsl);
    for (std::size_t k = 0; k < nb; ++k) {
      mp = std::min(mp, max_step_psd(it_.X[k], dir.dX[k]));
      md = std::min(md, max_step_psd(it_.S[k], dir.dS[k]));
    }
    const double tau = 0.9 + 0.09 * std::min(ap, ad);
    const double alpha_p = std::min(1.0, tau * mp);
    const double alpha_d = std::min(1.0, tau * md);
    tiny_steps = std::max(alpha_p, alpha_d) < 1e-8 ? tiny_steps + 1 : 0;

    it_.xf += alpha_p * dir.dxf;
    it_.xl += alpha_p * dir.dxl;
    it_.sl += alpha_d * dir.dsl;
    it_.y += alpha_d * dir.dy;
    for (std::size_t k = 0; k < nb; ++k) {
      it_.X[k] = sym(it_.X[k] + alpha_p * dir.dX[k]);
      it_.S[k] = sym(it_.S[k] + alpha_d * dir.dS[k]);
    }
  }
  if (outcome == SolveStatus::kOptimal) best_p = best_d = it_;
  return finish(best_p, best_d, outcome, iter, message);
}

}  // namespace

ConicSolution InteriorPointBackend::solve(const ConicProblem& prob, const SolverOptions& opts) const {
  return InteriorPoint(prob, opts).run();
}

ConicSolution solve(const ConicProblem& prob, const SolverOptions& opts) {
  return InteriorPointBackend().solve(prob, opts);
}

}  // namespace momentctl::sdp
