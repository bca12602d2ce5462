#pragma once

// Negative fractional powers (-A)^{-beta} by the contour integral
//   (1/2 pi i) \int_Gamma (-mu)^{-beta} R(mu, A) dmu
// over Gamma(psi, eps): a ray at arg -psi, the arc |mu| = eps through -eps and
// a ray at arg psi. The resolvent is split as R = (I + A R)/mu; the identity
// part integrates to zero, which leaves an integrand decaying like |mu|^{-2-beta}.

#include <cstdint>
#include <string>
#include <vector>

#include "mrlab/linalg.hpp"

namespace mrlab {

struct ContourSpec {
  double psi = 0.75 * 3.14159265358979323846;
  double eps = 0.0;     // 0: min |eig| / 10
  int n_per_leg = 1024;  // Gauss-Legendre nodes per ray (panels of 16 in log r)
  int n_arc = 128;
  double R_max = 0.0;   // 0: grow until the integrand tail is below tail_tol
  double tail_tol = 1e-12;

  void validate() const;
};

/// Nodes mu_k and weights w_k with (1/2 pi i) \int_Gamma g(mu) dmu ~ sum_k w_k g(mu_k).
struct ContourRule {
  std::vector<cplx> nodes;
  std::vector<cplx> weights;
  double eps = 0.0;
  double R_max = 0.0;
};

ContourRule contour_rule(const CMatrix& a, double beta, const ContourSpec& spec);

/// (-A)^{-beta}, beta in (0, 1]. Throws when an eigenvalue lies inside the
/// small disc or outside the sector |arg mu| > psi.
CMatrix frac_power_contour(const CMatrix& a, double beta, const ContourSpec& spec = {});

/// (-A)^{-beta} (or, with negative beta, the positive power) through the
/// eigendecomposition; exact for diagonalizable A with spectrum off [0, inf).
CMatrix frac_power_eig(const CMatrix& a, double beta);

/// Contour quadrature of (1/2 pi i) \int (-mu)^{-beta} C R(mu, A) dmu.
CMatrix J_operator(const CMatrix& c, const CMatrix& a, double beta, const ContourSpec& spec = {});

struct DecayFit {
  double M = 0.0;
  double slope = 0.0;
  bool degenerate = false;  // all norms vanish
  std::vector<double> re_mu;
  std::vector<double> norms;
};

/// Least-squares fit log |C R(mu, A)| = log M + slope log(mu) along real mu.
DecayFit resolvent_decay_fit(const CMatrix& c, const CMatrix& a, const std::vector<double>& re_grid);

struct PerturbationBound {
  double c = 0.0;
  int probes = 0;
  bool holds = true;
  double worst_ratio = 0.0;  // max |P x| / |(-A)^beta x| over probes
};

/// c = |P (-A)^{-beta}|_2 and the probe check |P x| <= (c + 1e-8) |(-A)^beta x|.
PerturbationBound small_perturbation_bound(const CMatrix& p, const CMatrix& a, double beta,
                                           const ContourSpec& spec = {}, int probes = 100,
                                           std::uint64_t seed = 11);

/// Integrand samples (node, |weight * integrand|) written as CSV.
void dump_contour_samples(const CMatrix& a, double beta, const ContourSpec& spec,
                          const std::string& path);

}  // namespace mrlab
