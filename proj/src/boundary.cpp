#include "mrlab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mrlab {

namespace {

CMatrix select_columns(const CMatrix& m, const std::vector<Index>& cols) {
  CMatrix out(m.rows(), static_cast<Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = m.col(cols[j]);
  return out;
}

CMatrix stack(const CMatrix& top, const CMatrix& bottom) {
  CMatrix out(top.rows() + bottom.rows(), std::max(top.cols(), bottom.cols()));
  if (top.rows() > 0) out.topRows(top.rows()) = top;
  if (bottom.rows() > 0) out.bottomRows(bottom.rows()) = bottom;
  return out;
}

}  // namespace

BoundarySystem::BoundarySystem(BoundaryDescription d) : d_(std::move(d)) {
  const Index n_ext = d_.am.cols();
  const Index n_state = d_.am.rows();
  if (static_cast<Index>(d_.state_index.size()) != n_state) {
    throw LinalgError("BoundarySystem: state_index size must equal rows of A_m");
  }
  if (d_.g.cols() != n_ext || d_.k.cols() != n_ext || d_.g.rows() != d_.k.rows()) {
    throw LinalgError("BoundarySystem: G and K must be m x n_ext");
  }
  if (d_.z_constraints.size() == 0) d_.z_constraints.resize(0, n_ext);
  if (d_.z_constraints.cols() != n_ext) throw LinalgError("BoundarySystem: Z constraints must be c x n_ext");
  if (d_.weights.empty()) d_.weights.assign(static_cast<size_t>(n_state), 1.0);
  if (static_cast<Index>(d_.weights.size()) != n_state) throw LinalgError("BoundarySystem: weight count");
  for (const auto* m : {&d_.am, &d_.g, &d_.k, &d_.z_constraints}) require_finite(*m, "BoundarySystem");

  std::vector<bool> is_state(static_cast<size_t>(n_ext), false);
  for (Index i : d_.state_index) {
    if (i < 0 || i >= n_ext || is_state[static_cast<size_t>(i)]) {
      throw LinalgError("BoundarySystem: invalid state_index");
    }
    is_state[static_cast<size_t>(i)] = true;
  }
  for (Index i = 0; i < n_ext; ++i) {
    if (!is_state[static_cast<size_t>(i)]) ghost_.push_back(i);
  }
  if (static_cast<Index>(ghost_.size()) != d_.z_constraints.rows() + m()) {
    throw LinalgError("BoundarySystem: ghost count must equal Z constraints + boundary rows");
  }
  // H1: G onto U.
  if (m() > 0) {
    Eigen::BDCSVD<CMatrix> svd(d_.g);
    const auto& s = svd.singularValues();
    if (s.minCoeff() <= 1e-12 * s.maxCoeff()) throw LinalgError("BoundarySystem: G is not of full row rank");
  }
  am_state_ = select_columns(d_.am, d_.state_index);
  am_ghost_ = select_columns(d_.am, ghost_);
  ghost_free_ = eliminate(Domain::Free);
  ghost_pert_ = eliminate(Domain::Perturbed);
  a_free_ = am_state_ + am_ghost_ * ghost_free_;
  a_pert_ = am_state_ + am_ghost_ * ghost_pert_;
  a_norm1_ = a_free_.cwiseAbs().colwise().sum().maxCoeff();
}

BoundarySystem BoundarySystem::with_k(const CMatrix& k) const {
  BoundaryDescription d = d_;
  d.k = k;
  return BoundarySystem(std::move(d));
}

CMatrix BoundarySystem::eliminate(Domain dom) const {
  const CMatrix boundary = dom == Domain::Free ? d_.g : CMatrix(d_.g - d_.k);
  const CMatrix constraints = stack(d_.z_constraints, boundary);
  const CMatrix cg = select_columns(constraints, ghost_);
  const CMatrix cs = select_columns(constraints, d_.state_index);
  if (cg.size() == 0) return CMatrix::Zero(0, n_state());
  Eigen::BDCSVD<CMatrix> svd(cg);
  const auto& s = svd.singularValues();
  if (!(s.minCoeff() > 1e-12 * std::max(1.0, s.maxCoeff()))) {
    throw LinalgError(dom == Domain::Free ? "boundary functional degenerate"
                                          : "ill-posed boundary coupling");
  }
  return -cg.partialPivLu().solve(cs);
}

CMatrix BoundarySystem::restrict(const CMatrix& x_ext) const {
  CMatrix out(n_state(), x_ext.cols());
  for (size_t i = 0; i < d_.state_index.size(); ++i) out.row(static_cast<Index>(i)) = x_ext.row(d_.state_index[i]);
  return out;
}

CMatrix BoundarySystem::ghost_map(Domain dom) const {
  return dom == Domain::Free ? ghost_free_ : ghost_pert_;
}

CMatrix BoundarySystem::extend(const CMatrix& x_state, Domain dom) const {
  if (x_state.rows() != n_state()) throw LinalgError("extend: dimension mismatch");
  CMatrix out = CMatrix::Zero(n_ext(), x_state.cols());
  for (size_t i = 0; i < d_.state_index.size(); ++i) out.row(d_.state_index[i]) = x_state.row(static_cast<Index>(i));
  const CMatrix ghosts = ghost_map(dom) * x_state;
  for (size_t i = 0; i < ghost_.size(); ++i) out.row(ghost_[i]) = ghosts.row(static_cast<Index>(i));
  return out;
}

CMatrix BoundarySystem::generator_matrix(Domain dom) const {
  return dom == Domain::Free ? a_free_ : a_pert_;
}

Generator BoundarySystem::realize_A() const {
  return Generator::make(generator_matrix(Domain::Free), d_.label + ":A");
}

Generator BoundarySystem::realize_perturbed() const {
  return Generator::make(generator_matrix(Domain::Perturbed), d_.label + ":A_pert");
}

CMatrix BoundarySystem::k_state() const { return d_.k * extend(CMatrix::Identity(n_state(), n_state()), Domain::Perturbed); }

DirichletOp BoundarySystem::dirichlet(cplx lambda) const {
  // Proximity to sigma(A) from the LU condition estimate: sigma_min ~ rcond * |.|_1.
  CMatrix shifted = -a_free_;
  shifted.diagonal().array() += lambda;
  Eigen::PartialPivLU<CMatrix> shifted_lu(shifted);
  const double smin = shifted_lu.rcond() * shifted.cwiseAbs().colwise().sum().maxCoeff();
  if (!(smin >= 1e-8 * std::max(1.0, a_norm1_))) throw SpectrumError(lambda, smin, "Dirichlet solve singular");

  // [lambda S - A_m; Z constraints; G] d = [0; 0; u]
  const Index n = n_state(), ne = n_ext(), mm = m(), c = d_.z_constraints.rows();
  CMatrix sys = CMatrix::Zero(ne, ne);
  sys.topRows(n) = -d_.am;
  for (Index i = 0; i < n; ++i) sys(i, d_.state_index[static_cast<size_t>(i)]) += lambda;
  if (c > 0) sys.middleRows(n, c) = d_.z_constraints;
  sys.bottomRows(mm) = d_.g;
  CMatrix rhs = CMatrix::Zero(ne, mm);
  rhs.bottomRows(mm) = CMatrix::Identity(mm, mm);
  Eigen::PartialPivLU<CMatrix> lu(sys);
  const CMatrix d_ext = lu.solve(rhs);

  DirichletOp out;
  out.lambda = lambda;
  out.D = restrict(d_ext);
  const CMatrix interior = sys.topRows(n) * d_ext;
  out.interior_residual = interior.norm() / (sys.topRows(n).norm() * std::max(1e-300, d_ext.norm()));
  out.constraint_residual = (d_.g * d_ext - CMatrix::Identity(mm, mm)).norm() / std::sqrt(double(mm));
  return out;
}

ControlVector BoundarySystem::control_vector(cplx lambda) const {
  const CMatrix a = generator_matrix(Domain::Free);
  const DirichletOp d = dirichlet(lambda);
  ControlVector cv;
  cv.lambda_build = lambda;
  CMatrix shifted = -a;
  shifted.diagonal().array() += lambda;
  cv.B = shifted * d.D;
  // R(mu, A) B = D_mu at two further points.
  for (cplx mu : {lambda + 1.0, lambda + cplx(10.0, 3.0)}) {
    try {
      const CMatrix dm = dirichlet(mu).D;
      const double r = (resolvent(a, mu) * cv.B - dm).norm() / std::max(1e-300, dm.norm());
      cv.consistency_residual = std::max(cv.consistency_residual, r);
    } catch (const SpectrumError&) {
    }
  }
  return cv;
}

ResolventIdentityReport resolvent_identity_check(const BoundarySystem& bs, cplx lambda) {
  const CMatrix a = bs.realize_A().A;
  const CMatrix a_pert = bs.realize_perturbed().A;
  const CMatrix k = bs.k_state();
  const Index n = bs.n_state(), m = bs.m();
  ResolventIdentityReport rep;
  rep.lambda = lambda;
  const DirichletOp d = bs.dirichlet(lambda);

  CMatrix shifted_pert = -a_pert;
  shifted_pert.diagonal().array() += lambda;
  rep.sv_perturbed = smallest_singular_value(shifted_pert);
  rep.sv_feedback = smallest_singular_value(CMatrix::Identity(m, m) - k * d.D);

  const CMatrix b = bs.control_vector(lambda).B;
  rep.generator_eq = (a_pert - (a + b * k)).norm() / a_pert.norm();

  const CMatrix closing = CMatrix::Identity(n, n) - d.D * k;
  Eigen::PartialPivLU<CMatrix> lu(closing);
  if (rep.sv_feedback < 1e-10 * std::max(1.0, k.norm() * d.D.norm())) {
    // lambda in sigma(A_pert) while lambda in rho(A): the exceptional case.
    rep.feedback_obstruction = true;
    rep.thm32_iv = 0.0;
    return rep;
  }
  const CMatrix r_pert = resolvent(a_pert, lambda);
  const CMatrix rhs = lu.solve(resolvent(a, lambda));
  rep.thm32_iv = (r_pert - rhs).norm() / r_pert.norm();
  return rep;
}

double singularity_detector_correlation(const BoundarySystem& bs, const std::vector<cplx>& grid) {
  std::vector<double> x, y;
  for (cplx l : grid) {
    try {
      const auto rep = resolvent_identity_check(bs, l);
      x.push_back(std::log(std::max(rep.sv_perturbed, 1e-300)));
      y.push_back(std::log(std::max(rep.sv_feedback, 1e-300)));
    } catch (const SpectrumError&) {
    }
  }
  const double n = static_cast<double>(x.size());
  if (n < 3) throw LinalgError("singularity_detector_correlation: too few usable grid points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double generator_lambda_independence(const BoundarySystem& bs, cplx l1, cplx l2) {
  const CMatrix a = bs.realize_A().A;
  const CMatrix k = bs.k_state();
  const CMatrix a_pert = bs.realize_perturbed().A;
  const CMatrix g1 = a + bs.control_vector(l1).B * k;
  const CMatrix g2 = a + bs.control_vector(l2).B * k;
  return (g1 - g2).norm() / a_pert.norm();
}

}  // namespace mrlab
