#include "mrlab/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mrlab/admissibility.hpp"

namespace mrlab {

namespace {

constexpr int kPanelOrder = 16;

struct SectorSum {
  double total = 0.0;
  double outer = 0.0;
};

template <class G>
SectorSum sector_sum(const SectorSpec& spec, G&& g) {
  std::vector<double> tau, wt, x, wx;
  composite_gauss(0.0, spec.R_max, spec.n_radial / kPanelOrder, kPanelOrder, tau, wt);
  composite_gauss(-1.0, 1.0, spec.n_angular / kPanelOrder, kPanelOrder, x, wx);
  const double tn = std::tan(spec.theta);
  SectorSum s;
  const size_t outer_start = tau.size() - kPanelOrder;
  for (size_t i = 0; i < tau.size(); ++i) {
    const double half_width = tn * tau[i];
    double ring = 0.0;
    for (size_t j = 0; j < x.size(); ++j) ring += g(cplx(tau[i], half_width * x[j])) * wx[j] * half_width;
    s.total += ring * wt[i];
    if (i >= outer_start) s.outer += ring * wt[i];
  }
  return s;
}

BergmanNorm finish(const SectorSum& s, double q) {
  BergmanNorm out;
  out.norm = std::pow(s.total, 1.0 / q);
  out.tail_estimate = s.total > 0.0 ? s.outer / s.total : 0.0;
  return out;
}

}  // namespace

void SectorSpec::validate() const {
  if (!(theta > 0.0 && theta < 0.5 * std::numbers::pi)) throw LinalgError("SectorSpec: theta must lie in (0, pi/2)");
  if (!(R_max > 0.0)) throw LinalgError("SectorSpec: R_max must be positive");
  if (n_radial < kPanelOrder || n_radial % kPanelOrder != 0) {
    throw LinalgError("SectorSpec: n_radial must be a positive multiple of 16");
  }
  if (n_angular < kPanelOrder || n_angular % kPanelOrder != 0) {
    throw LinalgError("SectorSpec: n_angular must be a positive multiple of 16");
  }
  if (!(p >= 1.0)) throw LinalgError("SectorSpec: p must be at least 1");
  if (!(s > 1.0 && s <= 2.0)) throw LinalgError("SectorSpec: s must lie in (1, 2]");
}

SectorSpec SectorSpec::refined(int factor) const {
  SectorSpec out = *this;
  out.n_radial *= factor;
  out.n_angular *= factor;
  return out;
}

BergmanNorm bergman_norm(const HoloFn& f, const SectorSpec& spec) {
  spec.validate();
  const double q = spec.q();
  return finish(sector_sum(spec, [&](cplx z) { return std::pow(std::abs(f(z)), q); }), q);
}

BergmanNorm bergman_norm_vec(const std::function<CVector(cplx)>& f, const SectorSpec& spec) {
  spec.validate();
  const double q = spec.q();
  return finish(sector_sum(spec, [&](cplx z) { return std::pow(f(z).norm(), q); }), q);
}

TraceCheck bergman_trace_check(const HoloFn& f, double R, double p, const SectorSpec& spec) {
  if (!(R > 0.0)) throw LinalgError("bergman_trace_check: R must be positive");
  SectorSpec sp = spec;
  sp.p = p;
  TraceCheck out;
  std::vector<double> t, w;
  composite_gauss(0.0, R, 64, kPanelOrder, t, w);
  for (size_t i = 0; i < t.size(); ++i) out.lhs += w[i] * std::pow(std::abs(f(cplx(t[i], 0.0))), p);
  out.rhs_norm = bergman_norm(f, sp).norm;
  out.ratio = out.rhs_norm > 0.0 ? out.lhs / std::pow(out.rhs_norm, p) : 0.0;
  return out;
}

HoloFn KernelSpec::holomorphic() const {
  const double r = rate, c = scale;
  if (name == "exp") return [=](cplx z) { return c * std::exp(-r * z); };
  if (name == "rational") return [=](cplx z) { return c / ((1.0 + r * z) * (1.0 + r * z)); };
  if (name == "gaussian") return [=](cplx z) { return c * std::exp(-r * z * z); };
  if (name == "zero") return [](cplx) { return cplx(0.0, 0.0); };
  throw LinalgError("unknown kernel '" + name + "' (expected exp, rational, gaussian or zero)");
}

Companion companion_assemble(const Generator& a0, const VolterraSpec& vspec, double T) {
  if (!(T > 0.0)) throw LinalgError("companion_assemble: T must be positive");
  if (vspec.mem_nodes < 1) throw LinalgError("companion_assemble: need at least one memory node");
  const Index n = a0.dim();
  if (vspec.F.rows() != n || vspec.F.cols() != n) throw LinalgError("companion_assemble: F must be n x n");
  const HoloFn a = vspec.kernel.holomorphic();
  Companion c;
  c.n_state = n;
  c.mem_nodes = vspec.mem_nodes;
  c.S_max = vspec.S_max > 0.0 ? vspec.S_max : T;
  c.delta = c.S_max / c.mem_nodes;
  const int m = c.mem_nodes;
  CMatrix g = CMatrix::Zero(n * (m + 1), n * (m + 1));
  g.topLeftCorner(n, n) = a0.A;
  g.block(0, n, n, n) = CMatrix::Identity(n, n);
  const double inv = 1.0 / c.delta;
  for (int j = 0; j < m; ++j) {
    const Index row = n * (j + 1);
    g.block(row, 0, n, n) = a(cplx(j * c.delta, 0.0)).real() * vspec.F;
    g.block(row, row, n, n).diagonal().array() -= inv;
    if (j + 1 < m) g.block(row, row + n, n, n).diagonal().array() += inv;
  }
  // Gershgorin bound in place of the spectral abscissa: a dense eigensolve
  // of the product-space matrix costs far more than the time stepping.
  double gersh = -INFINITY;
  for (Index i = 0; i < g.rows(); ++i) {
    gersh = std::max(gersh, g(i, i).real() + g.row(i).cwiseAbs().sum() - std::abs(g(i, i)));
  }
  c.gen.A = std::move(g);
  c.gen.omega0 = gersh;
  c.gen.label = "companion";
  if (c.S_max < T) {
    double tail = 0.0;
    for (int i = 0; i <= 256; ++i) {
      tail = std::max(tail, std::abs(a(cplx(c.S_max + (T - c.S_max) * i / 256.0, 0.0))));
    }
    c.horizon_flag = tail > 1e-10;
  }
  return c;
}

BochnerSignal volterra_direct(const Generator& a0, const VolterraSpec& vspec, const BochnerSignal& f) {
  const Index n = a0.dim();
  if (f.dim() != n) throw LinalgError("volterra_direct: forcing dimension mismatch");
  const TimeGrid& grid = f.grid;
  const double h = grid.h();
  const Propagator prop(a0.A, h);
  const bool memory = !vspec.kernel.is_zero();
  std::vector<double> c;
  if (memory) {
    if (vspec.F.rows() != n || vspec.F.cols() != n) throw LinalgError("volterra_direct: F must be n x n");
    for (int l = 0; l <= grid.n; ++l) c.push_back(h * vspec.kernel(grid.t(l)));
  }
  const MatrixAction F(memory ? vspec.F : CMatrix());
  BochnerSignal x = BochnerSignal::zeros(grid, n);
  CMatrix fx = CMatrix::Zero(n, grid.n + 1);
  for (int k = 0; k < grid.n; ++k) {
    CVector g = f.at(k);
    if (memory) {
      for (int j = 0; j < k; ++j) g += c[static_cast<size_t>(k - j)] * fx.col(j);
    }
    x.samples.col(k + 1) = prop.step(x.at(k), g);
    if (memory) fx.col(k + 1) = F(x.at(k + 1));
  }
  return x;
}

CompanionComparison companion_vs_direct(const Generator& a0, const VolterraSpec& vspec,
                                        const BochnerSignal& f) {
  CompanionComparison out;
  out.direct = volterra_direct(a0, vspec, f);
  const Index n = a0.dim();
  const Companion comp = companion_assemble(a0, vspec, f.grid.T);
  out.horizon_flag = comp.horizon_flag;
  // The forcing (f, 0) only enters the state block, so phi1 is needed on
  // the first n columns only.
  const Index dim = comp.gen.dim();
  CMatrix inject = CMatrix::Zero(dim, n);
  inject.topRows(n) = CMatrix::Identity(n, n);
  const ExpPhi ep = exp_phi_apply(comp.gen.A, f.grid.h(), inject);
  const MatrixAction E(ep.exp), Phi(ep.phi_b);
  out.companion_first = BochnerSignal::zeros(f.grid, n);
  CVector y = CVector::Zero(dim);
  for (int k = 0; k < f.grid.n; ++k) {
    y = E(y) + Phi(f.at(k));
    out.companion_first.samples.col(k + 1) = y.head(n);
  }
  const double scale = out.direct.samples.colwise().norm().maxCoeff();
  out.rel_diff = (out.direct.samples - out.companion_first.samples).colwise().norm().maxCoeff() /
                 std::max(scale, 1e-300);
  return out;
}

UpsilonReport upsilon_admissibility(const Generator& a0, const VolterraSpec& vspec, const SectorSpec& sector,
                                    double alpha, double p, int steps, std::uint64_t seed) {
  if (steps < kPanelOrder || steps % kPanelOrder != 0) {
    throw LinalgError("upsilon_admissibility: steps must be a positive multiple of 16");
  }
  SectorSpec sp = sector;
  sp.p = p;
  sp.validate();
  UpsilonReport rep;
  const HoloFn a = vspec.kernel.holomorphic();
  rep.gamma = obs_admissibility(vspec.F, a0, alpha, p).kappa;
  rep.bergman_a = bergman_norm(a, sp).norm;
  rep.bound = rep.gamma * rep.bergman_a;

  // Time rule graded geometrically towards t = 0, where F T(t) x varies fastest.
  const int panels = steps / kPanelOrder;
  std::vector<double> t, w;
  double lo = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double hi = alpha * std::ldexp(1.0, k - panels + 1);
    std::vector<double> tk, wk;
    composite_gauss(lo, hi, 1, kPanelOrder, tk, wk);
    t.insert(t.end(), tk.begin(), tk.end());
    w.insert(w.end(), wk.begin(), wk.end());
    lo = hi;
  }
  std::vector<CMatrix> ft;
  for (double tk : t) ft.push_back(vspec.F * expm(a0.A, tk));

  const Index n = a0.dim();
  std::vector<CVector> probes;
  if (p == 2.0 && vspec.F.cwiseAbs().maxCoeff() > 0.0) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(observability_gramian(vspec.F, a0.A, alpha));
    probes.push_back(es.eigenvectors().col(n - 1));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 8; ++i) {
    CVector v(n);
    for (Index j = 0; j < n; ++j) v(j) = cplx(nd(rng), nd(rng));
    probes.push_back(v.normalized());
  }
  const SectorSpec fine = sp.refined(2);
  for (const CVector& x : probes) {
    double acc = 0.0;
    for (size_t k = 0; k < t.size(); ++k) {
      const CVector y = ft[k] * x;
      const double b = bergman_norm_vec([&](cplx z) -> CVector { return a(z) * y; }, fine).norm;
      acc += w[k] * std::pow(b, p);
    }
    rep.kappa_upsilon = std::max(rep.kappa_upsilon, std::pow(acc, 1.0 / p) / x.norm());
  }
  rep.slack = rep.bound > 0.0 ? 1.0 - rep.kappa_upsilon / rep.bound : 0.0;
  return rep;
}

}  // namespace mrlab
