#pragma once

// Volterra integro-differential equations x' = A0 x + int_0^t a(t-s) F x(s) ds + f.
// Kernels live in the Bergman space of a sector; the equation is solved
// either directly (memory quadrature) or through the companion system on
// X x (memory grid) with an upwind transport for the left shift.

#include <functional>
#include <string>

#include "mrlab/linalg.hpp"
#include "mrlab/mild.hpp"
#include "mrlab/semigroup.hpp"

namespace mrlab {

using HoloFn = std::function<cplx(cplx)>;

/// Truncated sector {tau + i sigma : 0 < tau <= R_max, |sigma| < tan(theta) tau}.
struct SectorSpec {
  double theta = 0.7853981633974483;  // pi/4
  double R_max = 40.0;
  int n_radial = 256;
  int n_angular = 32;
  double p = 2.0;
  double s = 2.0;  // auxiliary exponent in (1, 2]; q = p s / (s - 1)

  double q() const { return p * s / (s - 1.0); }
  void validate() const;
  SectorSpec refined(int factor) const;
};

struct BergmanNorm {
  double norm = 0.0;
  double tail_estimate = 0.0;  // integrand mass in the outermost radial panel
};

BergmanNorm bergman_norm(const HoloFn& f, const SectorSpec& spec);
/// X-valued variant: the integrand is |f(z)|_2^q.
BergmanNorm bergman_norm_vec(const std::function<CVector(cplx)>& f, const SectorSpec& spec);

struct TraceCheck {
  double lhs = 0.0;       // int_0^R |f(t)|^p dt
  double rhs_norm = 0.0;  // |f|_{B^q}
  double ratio = 0.0;     // lhs / rhs_norm^p (0 when f = 0)
};

TraceCheck bergman_trace_check(const HoloFn& f, double R, double p, const SectorSpec& spec);

/// Built-in kernels: "exp" scale*e^{-rate z}, "rational" scale/(1+rate z)^2,
/// "gaussian" scale*e^{-rate z^2}, "zero".
struct KernelSpec {
  std::string name = "exp";
  double rate = 1.0;
  double scale = 1.0;

  HoloFn holomorphic() const;
  double operator()(double t) const { return holomorphic()(cplx(t, 0.0)).real(); }
  bool is_zero() const { return name == "zero" || scale == 0.0; }
};

struct VolterraSpec {
  KernelSpec kernel;
  CMatrix F;
  double S_max = 0.0;  // 0 means the time horizon
  int mem_nodes = 64;
};

struct Companion {
  Generator gen;
  Index n_state = 0;
  int mem_nodes = 0;
  double delta = 0.0;
  double S_max = 0.0;
  bool horizon_flag = false;  // S_max < T and kernel tail beyond S_max > 1e-10
};

/// Block generator [[A0, delta_0], [a(s_j) F, d/ds]] on X x X^M with first
/// order upwind transport and zero inflow at S_max.
Companion companion_assemble(const Generator& a0, const VolterraSpec& vspec, double T);

/// Direct solver: x_{k+1} = e^{hA0} x_k + phi1(A0, h)(f_k + sum_{j<k} h a(t_k - t_j) F x_j).
BochnerSignal volterra_direct(const Generator& a0, const VolterraSpec& vspec, const BochnerSignal& f);

struct CompanionComparison {
  double rel_diff = 0.0;
  bool horizon_flag = false;
  BochnerSignal direct;
  BochnerSignal companion_first;
};

CompanionComparison companion_vs_direct(const Generator& a0, const VolterraSpec& vspec,
                                        const BochnerSignal& f);

struct UpsilonReport {
  double kappa_upsilon = 0.0;  // admissibility constant of x -> a(.) F T(t) x into B^q(X)
  double gamma = 0.0;          // admissibility constant of F for A0
  double bergman_a = 0.0;      // |a|_{B^q}
  double bound = 0.0;          // gamma * |a|_{B^q}
  double slack = 0.0;          // 1 - kappa_upsilon / bound
};

UpsilonReport upsilon_admissibility(const Generator& a0, const VolterraSpec& vspec,
                                    const SectorSpec& sector, double alpha, double p, int steps = 256,
                                    std::uint64_t seed = 7);

}  // namespace mrlab
