#include "mrlab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "mrlab/fractional.hpp"

namespace mrlab {

std::vector<std::string> HeatConfig::validate() const {
  auto fail = [](const std::string& m) { throw LinalgError("HeatConfig: " + m); };
  if (N < 8) fail("N must be at least 8, got " + std::to_string(N));
  if (!(r > 1.0) || !std::isfinite(r)) fail("r must lie in (1, inf)");
  if (!(p > 1.0) || !std::isfinite(p)) fail("p must lie in (1, inf)");
  if (!(T > 0.0)) fail("T must be positive");
  if (steps < 1) fail("steps must be positive");
  if (!(theta_frac > 0.0)) fail("theta_frac must be positive");
  if (!(theta_frac < 1.0 / p) && !allow_theta_override) {
    fail("theta_frac must lie in (0, 1/p); pass the override flag for exploratory sweeps");
  }
  const double beta = (r - 1.0) / (2.0 * r);
  if (!(beta + gamma < 1.0)) fail("beta + gamma must be < 1 with beta = (r-1)/(2r)");

  std::vector<std::string> warnings;
  std::ostringstream os;
  if (!(gamma > 1.0 / 3.0 && gamma < 1.0 / r)) {
    os << "gamma=" << gamma << " outside (1/3, 1/r)";
    warnings.push_back(os.str());
    os.str("");
  }
  const double lo = 2.0 * r / (r + 1.0), hi = 1.0 / gamma;
  if (!(p > lo && p < hi)) {
    os << "p=" << p << " outside the admissibility window (" << lo << ", " << hi << ")";
    warnings.push_back(os.str());
  }
  if (theta_frac >= 1.0 / p) warnings.push_back("theta_frac >= 1/p (override active)");
  return warnings;
}

BoundarySystem build_heat(int N) {
  HeatConfig cfg;
  cfg.N = N;
  return build_heat(cfg);
}

BoundarySystem build_heat(const HeatConfig& cfg) {
  cfg.validate();
  const int N = cfg.N;
  const double h = 1.0 / N;
  const Index n_state = N + 1, n_ext = N + 3;
  // Extended layout: [ghost at -h, x_0 .. x_N, ghost at 1 + h].
  auto ext = [](Index i) { return i + 1; };
  BoundaryDescription d;
  d.label = "heat";
  d.am = CMatrix::Zero(n_state, n_ext);
  for (Index i = 0; i < n_state; ++i) {
    d.am(i, ext(i) - 1) = 1.0 / (h * h);
    d.am(i, ext(i)) = -2.0 / (h * h);
    d.am(i, ext(i) + 1) = 1.0 / (h * h);
  }
  d.z_constraints = CMatrix::Zero(1, n_ext);  // f'(0) = 0
  d.z_constraints(0, ext(1)) = 1.0 / (2.0 * h);
  d.z_constraints(0, ext(-1)) = -1.0 / (2.0 * h);
  d.g = CMatrix::Zero(1, n_ext);  // f'(1)
  d.g(0, ext(N + 1)) = 1.0 / (2.0 * h);
  d.g(0, ext(N - 1)) = -1.0 / (2.0 * h);
  d.k = CMatrix::Zero(1, n_ext);  // f(1) - f(0)
  d.k(0, ext(N)) = 1.0;
  d.k(0, ext(0)) = -1.0;
  for (Index i = 0; i < n_state; ++i) d.state_index.push_back(ext(i));
  d.weights.assign(static_cast<size_t>(n_state), h);
  d.weights.front() = d.weights.back() = h / 2.0;
  return BoundarySystem(std::move(d));
}

std::vector<double> heat_nodes(const BoundarySystem& bs) {
  const Index n = bs.n_state();
  std::vector<double> s(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) s[static_cast<size_t>(i)] = static_cast<double>(i) / (n - 1);
  return s;
}

double spatial_norm(const BoundarySystem& bs, const CVector& x, double r) {
  const auto& w = bs.weights();
  double acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) acc += w[static_cast<size_t>(i)] * std::pow(std::abs(x(i)), r);
  return std::pow(acc, 1.0 / r);
}

CMatrix heat_k_state_row(const BoundarySystem& bs) { return bs.k_state(); }

CMatrix heat_average_row(const BoundarySystem& bs) {
  CMatrix row(1, bs.n_state());
  for (Index i = 0; i < bs.n_state(); ++i) row(0, i) = bs.weights()[static_cast<size_t>(i)];
  return row;
}

FavardFit favard_exponent_scan(const BoundarySystem& bs, const std::vector<double>& lambdas, double r) {
  FavardFit fit;
  fit.r = r;
  fit.expected = -(r + 1.0) / (2.0 * r);
  std::vector<double> x, y;
  for (double l : lambdas) {
    if (!(l > 0.0)) throw LinalgError("favard_exponent_scan: lambda grid must be positive");
    try {
      const CMatrix d = bs.dirichlet(l).D;
      const double nrm = spatial_norm(bs, d.col(0), r);
      fit.lambdas.push_back(l);
      fit.norms.push_back(nrm);
      fit.sup_scaled = std::max(fit.sup_scaled, std::pow(l, (r + 1.0) / (2.0 * r)) * nrm);
      x.push_back(std::log(l));
      y.push_back(std::log(nrm));
    } catch (const SpectrumError&) {
      ++fit.flagged;
    }
  }
  if (x.size() < 2) throw LinalgError("favard_exponent_scan: too few usable lambdas");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

double trapezoid_norm(const std::vector<double>& v, double r) {
  const size_t n = v.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? h / 2.0 : h;
    acc += w * std::pow(std::abs(v[i]), r);
  }
  return std::pow(acc, 1.0 / r);
}

}  // namespace

double dirichlet_profile_norm(double lambda, double r) {
  const double k = std::sqrt(lambda);
  // cosh(k s) / (k sinh k) written to avoid overflow for large k.
  auto d = [k](double s) {
    const double num = std::exp(k * (s - 1.0)) + std::exp(-k * (s + 1.0));
    const double den = k * (1.0 - std::exp(-2.0 * k));
    return num / den;
  };
  const double integral =
      adaptive_simpson([&](double s) { return std::pow(std::abs(d(s)), r); }, 0.0, 1.0, 1e-14);
  return std::pow(integral, 1.0 / r);
}

InterpolationCheck interpolation_inequality_check(const std::vector<double>& f,
                                                  const std::vector<double>& df,
                                                  const std::vector<double>& d2f,
                                                  const std::vector<double>& eps_grid, double r) {
  if (f.size() < 2 || f.size() != df.size() || f.size() != d2f.size()) {
    throw LinalgError("interpolation_inequality_check: sample vectors must agree in size");
  }
  const double nf = trapezoid_norm(f, r), ndf = trapezoid_norm(df, r), nd2f = trapezoid_norm(d2f, r);
  InterpolationCheck out;
  out.min_slack = INFINITY;
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw LinalgError("interpolation_inequality_check: eps must be positive");
    const double slack = 9.0 / eps * nf + eps * nd2f - ndf;
    if (slack < out.min_slack) {
      out.min_slack = slack;
      out.eps_at_min = eps;
    }
    if (slack < 0.0) out.holds = false;
  }
  return out;
}

AdjointBReport adjoint_B_check(const BoundarySystem& bs, cplx lambda) {
  const CMatrix b = bs.control_vector(lambda).B;
  const auto& w = bs.weights();
  const Index n = bs.n_state();
  AdjointBReport rep;
  rep.b_adjoint.resize(1, n);
  for (Index i = 0; i < n; ++i) rep.b_adjoint(0, i) = w[static_cast<size_t>(i)] * std::conj(b(i, 0));
  double total = 0.0, near = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double a = std::abs(rep.b_adjoint(0, i));
    total += a;
    if (i >= n - 4) near += a;  // nodes within 3 cells of s = 1
  }
  rep.concentration = total > 0.0 ? near / total : 0.0;
  // <B u, v>_X against u conj(B* v).
  const cplx u(0.7, -0.3);
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = cplx(std::sin(1.0 + i), std::cos(2.0 * i));
  cplx lhs = 0.0;
  for (Index i = 0; i < n; ++i) lhs += w[static_cast<size_t>(i)] * u * b(i, 0) * std::conj(v(i));
  const cplx bstar_v = (rep.b_adjoint * v)(0, 0);
  const cplx rhs = u * std::conj(bstar_v);
  rep.pairing_residual = std::abs(lhs - rhs) / std::max(1e-300, std::abs(lhs));
  return rep;
}

NullPair null_pair(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Index last = a.rows() - 1;
  const auto& s = svd.singularValues();
  if (s(last) > 1e-8 * std::max(1.0, s(0))) throw LinalgError("null_pair: matrix is not singular");
  NullPair np;
  np.right = svd.matrixV().col(last);
  np.left = svd.matrixU().col(last);
  const cplx pairing = np.left.dot(np.right);  // left^H right
  if (std::abs(pairing) < 1e-12) throw LinalgError("null_pair: zero eigenvalue is not semisimple");
  np.left /= std::conj(pairing);
  return np;
}

CMatrix heat_fractional_F(const CMatrix& a0, double theta, bool via_contour) {
  if (!(theta > 0.0 && theta < 1.0)) throw LinalgError("heat_fractional_F: theta must lie in (0, 1)");
  const Index n = a0.rows();
  const NullPair np = null_pair(a0);
  const CMatrix proj = np.right * np.left.adjoint();  // spectral projector onto ker A0
  const CMatrix complement = CMatrix::Identity(n, n) - proj;
  // Shift the null eigenvalue to -1; every other eigenvalue is untouched.
  const CMatrix shifted = a0 - proj;
  if (via_contour) {
    ContourSpec spec;
    return (-shifted) * frac_power_contour(shifted, 1.0 - theta, spec) * complement;
  }
  return frac_power_eig(shifted, -theta) * complement;
}

PdeRun run_pde(const HeatConfig& cfg, const BochnerSignal& f, bool with_report) {
  const BoundarySystem bs = build_heat(cfg);
  const Generator gen = bs.realize_perturbed();
  if (f.dim() != bs.n_state()) throw LinalgError("run_pde: forcing dimension must be N+1");
  PdeRun run;
  run.z = evolve(gen, CVector::Zero(bs.n_state()), f);
  MaxRegOptions opts;
  opts.spatial_weights = bs.weights();
  if (with_report) {
    run.report = maxreg_constant(gen, f.grid, cfg.p, &f, opts);
  } else {
    run.report.p = cfg.p;
    run.report.T = f.grid.T;
    run.report.n = f.grid.n;
    witness_terms(gen, f, cfg.p, run.report, opts.spatial_weights);
  }
  run.norm_dz = run.report.norm_dz;
  run.norm_z = run.report.norm_z;
  run.norm_Gz = run.report.norm_Gz;
  run.norm_f = run.report.norm_f;
  return run;
}

double heat_steady_state_residual(const HeatConfig& cfg, double T) {
  const BoundarySystem bs = build_heat(cfg);
  const CMatrix a = bs.realize_perturbed().A;
  const Index n = bs.n_state();
  const NullPair np = null_pair(a);
  // Constants span ker A_pert, so a constant forcing has no steady state.
  // Use s^2 without its null component, which lies in the range.
  const std::vector<double> s = heat_nodes(bs);
  CVector f_bar(n);
  for (Index i = 0; i < n; ++i) f_bar(i) = s[static_cast<size_t>(i)] * s[static_cast<size_t>(i)];
  f_bar -= np.right * np.left.dot(f_bar);
  const TimeGrid grid = TimeGrid::make(T, cfg.steps);
  const BochnerSignal f = BochnerSignal::sample(grid, n, [&](double) { return f_bar; });
  const BochnerSignal w = evolve(Generator::make(a), CVector::Zero(n), f);
  const CVector res = a * w.at(grid.n) + f_bar;
  return res.norm() / f_bar.norm();
}

PideRun run_pide(const HeatConfig& cfg, const KernelSpec& kernel, const BochnerSignal& f,
                 int mem_nodes, bool with_report, bool with_dual_path) {
  cfg.validate();
  const BoundarySystem bs = build_heat(cfg);
  const Generator gen = bs.realize_perturbed();
  const CMatrix a0 = bs.realize_A().A;
  VolterraSpec vspec;
  vspec.kernel = kernel;
  vspec.F = heat_fractional_F(a0, cfg.theta_frac, false);
  vspec.S_max = f.grid.T;
  vspec.mem_nodes = mem_nodes;

  PideRun run;
  const CompanionComparison cmp = companion_vs_direct(gen, vspec, f);
  run.rho = cmp.direct;
  run.cross_check = cmp.rel_diff;
  run.horizon_flag = cmp.horizon_flag;
  if (with_dual_path) {
    VolterraSpec alt = vspec;
    alt.F = heat_fractional_F(a0, cfg.theta_frac, true);
    const BochnerSignal rho_alt = volterra_direct(gen, alt, f);
    const double scale = run.rho.samples.colwise().norm().maxCoeff();
    run.dual_path = (run.rho.samples - rho_alt.samples).colwise().norm().maxCoeff() / std::max(1e-300, scale);
  }
  MaxRegOptions opts;
  opts.spatial_weights = bs.weights();
  MemoryTerm memory;
  if (!kernel.is_zero()) {
    memory.F = vspec.F;
    for (int l = 0; l <= f.grid.n; ++l) memory.kernel.push_back(kernel(f.grid.t(l)));
  }
  if (with_report) {
    run.report = maxreg_constant(gen, f.grid, cfg.p, &f, opts, memory);
  } else {
    run.report.p = cfg.p;
    run.report.T = f.grid.T;
    run.report.n = f.grid.n;
    witness_terms(gen, f, cfg.p, run.report, opts.spatial_weights, memory);
  }
  run.report.label = "pide";
  return run;
}

}  // namespace mrlab
