#include "mrlab/admissibility.hpp"

#include <algorithm>
#include <cmath>

namespace mrlab {

CMatrix observability_gramian(const CMatrix& c, const CMatrix& a, double alpha) {
  require_square(a, "observability_gramian");
  if (c.cols() != a.rows()) throw LinalgError("observability_gramian: C and A do not compose");
  if (!(alpha > 0.0)) throw LinalgError("observability_gramian: alpha must be positive");
  const Index n = a.rows();
  const double anorm = a.cwiseAbs().colwise().sum().maxCoeff();
  int doublings = 0;
  double t = alpha;
  while (t * anorm > 0.5 && doublings < 60) {
    t /= 2.0;
    ++doublings;
  }
  // exp(t [[-A*, C*C], [0, A]]) = [[., Q], [0, e^{tA}]] with W(t) = e^{tA*} Q.
  CMatrix m = CMatrix::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = -a.adjoint();
  m.topRightCorner(n, n) = c.adjoint() * c;
  m.bottomRightCorner(n, n) = a;
  const CMatrix e = expm(m, t);
  CMatrix step = e.bottomRightCorner(n, n);
  CMatrix w = step.adjoint() * e.topRightCorner(n, n);
  w = 0.5 * (w + w.adjoint()).eval();
  for (int d = 0; d < doublings; ++d) {
    // W(2t) = W(t) + e^{tA*} W(t) e^{tA}.
    w = (w + step.adjoint() * w * step).eval();
    w = 0.5 * (w + w.adjoint()).eval();
    step = (step * step).eval();
  }
  return w;
}

namespace {

LpNormSpec weighted(double p, Index block, int n, double h) {
  LpNormSpec s;
  s.p = p;
  s.block_size = block;
  s.weights.assign(static_cast<size_t>(n), h);
  return s;
}

LpNormSpec single_block(double p, Index n) {
  LpNormSpec s;
  s.p = p;
  s.block_size = n;
  return s;
}

}  // namespace

AdmissibilityReport obs_admissibility(const CMatrix& c, const Generator& gen, double alpha, double p,
                                      int steps, const NormOptions& opts) {
  if (!(alpha > 0.0)) throw LinalgError("obs_admissibility: alpha must be positive");
  if (!(p > 1.0)) throw LinalgError("obs_admissibility: p must lie in (1, inf)");
  AdmissibilityReport rep;
  rep.alpha = alpha;
  rep.p = p;
  if (c.size() == 0 || c.cwiseAbs().maxCoeff() == 0.0) {
    rep.method = p == 2.0 ? "svd-exact" : "power-probe";
    return rep;
  }
  if (p == 2.0) {
    const CMatrix w = observability_gramian(c, gen.A, alpha);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(w, Eigen::EigenvaluesOnly);
    rep.kappa = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    rep.method = "svd-exact";
    return rep;
  }
  const TimeGrid grid = TimeGrid::make(alpha, steps);
  const Propagator prop(gen.A, grid.h());
  const Index n = gen.dim(), q = c.rows();
  LinearOperator op;
  op.rows = q * steps;
  op.cols = n;
  op.apply = [=](const CVector& x) {
    CVector y(q * steps);
    CVector z = x;
    for (int k = 0; k < steps; ++k) {
      z = prop.E(z);
      y.segment(k * q, q) = c * z;
    }
    return y;
  };
  op.apply_adjoint = [=](const CVector& y) {
    CVector acc = CVector::Zero(n);
    for (int k = steps - 1; k >= 0; --k) acc = prop.E.adjoint(acc + c.adjoint() * y.segment(k * q, q));
    return acc;
  };
  const NormEstimate est = boyd_norm(op, single_block(p, n), weighted(p, q, steps, grid.h()), opts);
  rep.kappa = est.value;
  rep.method = "power-probe";
  rep.probes = opts.restarts;
  return rep;
}

AdmissibilityReport ctrl_admissibility(const CMatrix& b, const Generator& gen, double t0, double p,
                                       int steps, const NormOptions& opts) {
  if (!(t0 > 0.0)) throw LinalgError("ctrl_admissibility: t0 must be positive");
  if (!(p > 1.0)) throw LinalgError("ctrl_admissibility: p must lie in (1, inf)");
  const TimeGrid grid = TimeGrid::make(t0, steps);
  const Propagator prop(gen.A, grid.h());
  const Index n = gen.dim(), m = b.cols();
  // Columns E^{n-1-k} Phi B for the input on cell k.
  CMatrix map(n, m * steps);
  CMatrix blk = prop.Phi.matrix() * b;
  for (int k = steps - 1; k >= 0; --k) {
    map.middleCols(k * m, m) = blk;
    blk = prop.E.matrix() * blk;
  }
  AdmissibilityReport rep;
  rep.alpha = t0;
  rep.p = p;
  if (p == 2.0) {
    rep.kappa = spectral_norm(map) / std::sqrt(grid.h());
    rep.method = "svd-exact";
    return rep;
  }
  const NormEstimate est =
      boyd_norm(LinearOperator::from_matrix(map), weighted(p, m, steps, grid.h()), single_block(p, n), opts);
  rep.kappa = est.value;
  rep.method = "power-probe";
  rep.probes = opts.restarts;
  return rep;
}

CMatrix IOOperatorMatrix::loop_matrix() const {
  if (out_dim != in_dim) throw LinalgError("feedback loop needs matching input and output dimensions");
  return blocks.topRows(grid.n * out_dim);
}

IOOperatorMatrix IOOperatorMatrix::truncated(int steps) const {
  if (steps < 1 || steps > grid.n) throw LinalgError("IOOperatorMatrix::truncated: bad step count");
  IOOperatorMatrix out = *this;
  out.grid = TimeGrid::make(grid.t(steps), steps);
  out.blocks = blocks.topLeftCorner((steps + 1) * out_dim, steps * in_dim);
  return out;
}

IOOperatorMatrix io_operator(const CMatrix& a, const CMatrix& b, const CMatrix& c, const TimeGrid& grid,
                             double p, const NormOptions& opts) {
  if (b.rows() != a.rows() || c.cols() != a.rows()) throw LinalgError("io_operator: dimension mismatch");
  const Propagator prop(a, grid.h());
  const int n = grid.n;
  const Index q = c.rows(), m = b.cols();
  std::vector<CMatrix> kern(static_cast<size_t>(n));
  CMatrix v = prop.Phi.matrix() * b;
  for (int l = 0; l < n; ++l) {
    kern[static_cast<size_t>(l)] = c * v;
    v = prop.E.matrix() * v;
  }
  IOOperatorMatrix f;
  f.grid = grid;
  f.p = p;
  f.out_dim = q;
  f.in_dim = m;
  f.blocks = CMatrix::Zero((n + 1) * q, n * m);
  for (int j = 1; j <= n; ++j) {
    for (int k = 0; k < j; ++k) f.blocks.block(j * q, k * m, q, m) = kern[static_cast<size_t>(j - 1 - k)];
  }
  const CMatrix body = f.blocks.bottomRows(n * q);
  if (p == 2.0) {
    f.theta = spectral_norm(body);  // equal time weights cancel
  } else {
    f.theta = opnorm(LinearOperator::from_matrix(body), weighted(p, m, n, grid.h()),
                     weighted(p, q, n, grid.h()), opts)
                  .value;
  }
  return f;
}

FeedbackReport feedback_admissible(const CMatrix& loop) {
  require_square(loop, "feedback_admissible");
  FeedbackReport rep;
  const Index n = loop.rows();
  rep.margin = smallest_singular_value(CMatrix::Identity(n, n) - loop);
  const Index half = n / 2;
  rep.margin_half = half > 0 ? smallest_singular_value(CMatrix::Identity(half, half) - loop.topLeftCorner(half, half))
                             : rep.margin;
  rep.invertible = rep.margin > 1e-8;
  return rep;
}

FeedbackReport feedback_admissible(const IOOperatorMatrix& f) {
  FeedbackReport rep = feedback_admissible(f.loop_matrix());
  // The half horizon must cut at a whole number of time steps.
  const Index q = f.out_dim;
  const CMatrix loop = f.loop_matrix();
  const Index half = (f.grid.n / 2) * q;
  rep.margin_half = smallest_singular_value(CMatrix::Identity(half, half) - loop.topLeftCorner(half, half));
  return rep;
}

RegularityReport regularity_check(const IOOperatorMatrix& f, const CVector& z0, const CMatrix* feedthrough) {
  if (z0.size() != f.in_dim) throw LinalgError("regularity_check: input dimension mismatch");
  const int n = f.grid.n;
  const Index q = f.out_dim;
  CVector u(n * f.in_dim);
  for (int k = 0; k < n; ++k) u.segment(k * f.in_dim, f.in_dim) = z0;
  CVector y = f.blocks * u;
  if (feedthrough != nullptr) {
    const CVector d = *feedthrough * z0;
    for (int j = 0; j <= n; ++j) y.segment(j * q, q) += d;
  }
  RegularityReport rep;
  for (int level = 0; level < 5; ++level) {
    const int steps = n >> level;
    if (steps < 1) break;
    CVector acc = CVector::Zero(q);
    for (int j = 1; j <= steps; ++j) acc += f.grid.h() * y.segment(j * q, q);
    const double tau = f.grid.t(steps);
    rep.tau.push_back(tau);
    rep.values.push_back(acc.norm() / tau);
  }
  const size_t m = rep.values.size();
  const bool all_zero = std::all_of(rep.values.begin(), rep.values.end(), [](double v) { return v == 0.0; });
  if (m >= 3 && !all_zero) {
    double slope = 0.0;
    for (size_t i = m - 2; i < m; ++i) {
      slope += std::log(rep.values[i - 1] / rep.values[i]) / std::log(rep.tau[i - 1] / rep.tau[i]);
    }
    rep.tail_slope = slope / 2.0;
  }
  // A vanishing limit shows as a power law tau^s with s bounded away from 0;
  // a feedthrough leaves a plateau with a slope near 0.
  const bool decreasing = m >= 3 && rep.values[m - 1] < rep.values[m - 2] && rep.values[m - 2] < rep.values[m - 3];
  rep.verdict = (all_zero || (decreasing && rep.tail_slope >= 0.25)) ? "regular-looking" : "not regular-looking";
  return rep;
}

YosidaExtensionReport yosida_extension(const CMatrix& c, const Generator& gen, const CVector& x,
                                       const std::vector<double>& s_grid) {
  if (s_grid.size() < 2) throw LinalgError("yosida_extension: need at least two s values");
  for (size_t i = 1; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > s_grid[i - 1])) throw LinalgError("yosida_extension: s grid must increase");
  }
  YosidaExtensionReport rep;
  rep.s = s_grid;
  const CVector cx = c * x;
  std::vector<double> lx, ly;
  for (double s : s_grid) {
    const CVector v = s * (c * resolvent(gen.A, s) * x);
    rep.values.push_back(v);
    const double err = (v - cx).norm();
    if (err > 0.0) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(err));
    }
  }
  const size_t m = s_grid.size();
  const double s1 = s_grid[m - 2], s2 = s_grid[m - 1];
  rep.limit = (s2 * rep.values[m - 1] - s1 * rep.values[m - 2]) / (s2 - s1);
  rep.error = (rep.limit - cx).norm() / std::max(cx.norm(), 1e-300);
  if (cx.norm() == 0.0) rep.error = rep.limit.norm();
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  rep.converged = rep.error <= 1e-8;
  return rep;
}

}  // namespace mrlab
