#include "mrlab/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace mrlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPanelOrder = 16;

cplx neg_pow(cplx mu, double beta) { return std::exp(-beta * std::log(-mu)); }

}  // namespace

void ContourSpec::validate() const {
  if (!(psi > 0.5 * kPi && psi < kPi)) throw LinalgError("ContourSpec: psi must lie in (pi/2, pi)");
  if (eps < 0.0) throw LinalgError("ContourSpec: eps must be nonnegative");
  if (n_per_leg < kPanelOrder || n_per_leg % kPanelOrder != 0) {
    throw LinalgError("ContourSpec: n_per_leg must be a positive multiple of 16");
  }
  if (n_arc < kPanelOrder || n_arc % kPanelOrder != 0) {
    throw LinalgError("ContourSpec: n_arc must be a positive multiple of 16");
  }
  if (R_max != 0.0 && eps != 0.0 && !(eps < R_max)) throw LinalgError("ContourSpec: need eps < R_max");
}

ContourRule contour_rule(const CMatrix& a, double beta, const ContourSpec& spec) {
  require_square(a, "frac_power_contour");
  require_finite(a, "frac_power_contour");
  spec.validate();
  if (!(beta > 0.0 && beta <= 1.0)) throw LinalgError("fractional power: beta must lie in (0, 1]");

  const CVector ev = eig(a).values;
  double min_abs = INFINITY;
  for (Index i = 0; i < ev.size(); ++i) min_abs = std::min(min_abs, std::abs(ev(i)));
  ContourRule rule;
  rule.eps = spec.eps > 0.0 ? spec.eps : min_abs / 10.0;
  for (Index i = 0; i < ev.size(); ++i) {
    const cplx l = ev(i);
    if (std::abs(l) <= rule.eps || std::abs(std::arg(l)) <= spec.psi) {
      std::ostringstream os;
      os << "fractional power: eigenvalue " << l.real() << (l.imag() < 0 ? "" : "+") << l.imag()
         << "i is not enclosed by the contour (eps=" << rule.eps << ", psi=" << spec.psi << ")";
      throw LinalgError(os.str());
    }
  }
  const double anorm = std::max(1.0, spectral_norm(a));
  if (spec.R_max > 0.0) {
    rule.R_max = spec.R_max;
  } else {
    // Tail of \int_R^inf r^{-beta} |A R(mu, A)| dr / (2 pi r) with |A R| ~ |A| / r.
    rule.R_max = std::max(10.0 * anorm, 2.0 * std::pow(anorm / (2.0 * kPi * (1.0 + beta) * spec.tail_tol),
                                                       1.0 / (1.0 + beta)));
  }
  if (!(rule.eps < rule.R_max)) throw LinalgError("ContourSpec: need eps < R_max");

  const cplx two_pi_i(0.0, 2.0 * kPi);
  std::vector<double> u, w;
  composite_gauss(std::log(rule.eps), std::log(rule.R_max), spec.n_per_leg / kPanelOrder, kPanelOrder, u, w);
  for (int leg = 0; leg < 2; ++leg) {
    // leg 0: arg -psi traversed inwards, leg 1: arg +psi outwards.
    const double ang = leg == 0 ? -spec.psi : spec.psi;
    const double dir = leg == 0 ? -1.0 : 1.0;
    for (size_t k = 0; k < u.size(); ++k) {
      const cplx mu = std::polar(std::exp(u[k]), ang);
      rule.nodes.push_back(mu);
      rule.weights.push_back(dir * mu * w[k] / two_pi_i);
    }
  }
  std::vector<double> phi, wphi;
  composite_gauss(spec.psi, 2.0 * kPi - spec.psi, spec.n_arc / kPanelOrder, kPanelOrder, phi, wphi);
  for (size_t k = 0; k < phi.size(); ++k) {
    const cplx mu = std::polar(rule.eps, phi[k]);
    // Traversed from 2 pi - psi down to psi.
    rule.nodes.push_back(mu);
    rule.weights.push_back(-cplx(0.0, 1.0) * mu * wphi[k] / two_pi_i);
  }
  return rule;
}

CMatrix frac_power_contour(const CMatrix& a, double beta, const ContourSpec& spec) {
  return J_operator(CMatrix::Identity(a.rows(), a.cols()), a, beta, spec);
}

CMatrix J_operator(const CMatrix& c, const CMatrix& a, double beta, const ContourSpec& spec) {
  if (c.cols() != a.rows()) throw LinalgError("J_operator: C and A do not compose");
  const ContourRule rule = contour_rule(a, beta, spec);
  const Index n = a.rows();
  // C A R(mu, A) = ((mu - A)^{-T} (C A)^T)^T.
  const CMatrix ca_t = (c * a).transpose();
  CMatrix acc = CMatrix::Zero(c.rows(), n);
  const CMatrix at = a.transpose();
  for (size_t k = 0; k < rule.nodes.size(); ++k) {
    const cplx mu = rule.nodes[k];
    CMatrix shifted = -at;
    shifted.diagonal().array() += mu;
    const CMatrix x = shifted.partialPivLu().solve(ca_t);
    acc += (rule.weights[k] * neg_pow(mu, beta) / mu) * x.transpose();
  }
  return acc;
}

CMatrix frac_power_eig(const CMatrix& a, double beta) {
  require_square(a, "frac_power_eig");
  const Spectrum sp = eig(a, true);
  const Index n = a.rows();
  CVector d(n);
  for (Index i = 0; i < n; ++i) {
    const cplx l = sp.values(i);
    if (l.imag() == 0.0 && l.real() >= 0.0 && !(beta < 0.0 && l.real() == 0.0)) {
      throw LinalgError("frac_power_eig: eigenvalue on [0, inf)");
    }
    d(i) = neg_pow(l, beta);
  }
  if (sp.orthogonal) return sp.vectors * d.asDiagonal() * sp.vectors.adjoint();
  return sp.vectors * d.asDiagonal() * sp.vectors.partialPivLu().inverse();
}

DecayFit resolvent_decay_fit(const CMatrix& c, const CMatrix& a, const std::vector<double>& re_grid) {
  if (re_grid.size() < 2) throw LinalgError("resolvent_decay_fit: need at least two grid points");
  DecayFit fit;
  std::vector<double> x, y;
  for (double s : re_grid) {
    if (!(s > 0.0)) throw LinalgError("resolvent_decay_fit: grid must lie in Re mu > 0");
    const double v = spectral_norm(c * resolvent(a, s));
    fit.re_mu.push_back(s);
    fit.norms.push_back(v);
    if (v > 0.0) {
      x.push_back(std::log(s));
      y.push_back(std::log(v));
    }
  }
  if (x.size() < 2) {
    fit.degenerate = true;
    return fit;
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.M = std::exp((sy - fit.slope * sx) / n);
  return fit;
}

PerturbationBound small_perturbation_bound(const CMatrix& p, const CMatrix& a, double beta,
                                           const ContourSpec& spec, int probes, std::uint64_t seed) {
  PerturbationBound out;
  const CMatrix neg_pow_a = frac_power_contour(a, beta, spec);
  out.c = spectral_norm(p * neg_pow_a);
  out.probes = probes;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int i = 0; i < probes; ++i) {
    CVector v(a.rows());
    for (Index j = 0; j < v.size(); ++j) v(j) = cplx(nd(rng), nd(rng));
    // x = (-A)^{-beta} v, so (-A)^beta x = v.
    const CVector x = neg_pow_a * v;
    const double ratio = (p * x).norm() / v.norm();
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    if (ratio > out.c + 1e-8) out.holds = false;
  }
  return out;
}

void dump_contour_samples(const CMatrix& a, double beta, const ContourSpec& spec,
                          const std::string& path) {
  const ContourRule rule = contour_rule(a, beta, spec);
  std::ofstream out(path);
  if (!out) throw LinalgError("cannot open " + path);
  out << "re_mu,im_mu,weighted_integrand_norm\n" << std::setprecision(17);
  for (size_t k = 0; k < rule.nodes.size(); ++k) {
    const cplx mu = rule.nodes[k];
    const CMatrix g = a * resolvent(a, mu, 1e300);
    out << mu.real() << "," << mu.imag() << ","
        << std::abs(rule.weights[k] * neg_pow(mu, beta) / mu) * spectral_norm(g) << "\n";
  }
}

}  // namespace mrlab
