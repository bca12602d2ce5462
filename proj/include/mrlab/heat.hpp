#pragma once

// One-dimensional heat equation on (0,1) with Neumann data at s = 0, the
// boundary control f'(1) and the nonlocal perturbation K f = f(1) - f(0).
// Vertex grid s_i = i/N with one ghost node beyond each end.

#include <string>
#include <vector>

#include "mrlab/boundary.hpp"
#include "mrlab/maxreg.hpp"
#include "mrlab/mild.hpp"
#include "mrlab/volterra.hpp"

namespace mrlab {

struct HeatConfig {
  int N = 64;
  double r = 2.0;
  double p = 2.0;
  double T = 1.0;
  int steps = 512;
  double theta_frac = 0.3;
  double gamma = 0.4;  // interpolation exponent of the boundary functional, in (1/3, 1/r)
  bool allow_theta_override = false;

  /// Throws on invalid values; returns warnings (admissibility window).
  std::vector<std::string> validate() const;
};

BoundarySystem build_heat(const HeatConfig& cfg);
BoundarySystem build_heat(int N);

/// Node coordinates s_i = i/N.
std::vector<double> heat_nodes(const BoundarySystem& bs);

/// Trapezoid L^r norm of state-grid samples.
double spatial_norm(const BoundarySystem& bs, const CVector& x, double r);

/// Row functional f(1) - f(0) on the state grid.
CMatrix heat_k_state_row(const BoundarySystem& bs);

/// Trapezoid average \int_0^1 f on the state grid (a bounded K).
CMatrix heat_average_row(const BoundarySystem& bs);

struct FavardFit {
  double r = 2.0;
  double slope = 0.0;
  double expected = 0.0;  // -(r+1)/(2r)
  double sup_scaled = 0.0;  // sup lambda^{(r+1)/(2r)} |D_lambda|
  std::vector<double> lambdas;
  std::vector<double> norms;
  int flagged = 0;
};

/// |D_lambda|_{L^r} for a real lambda grid and its log-log slope.
FavardFit favard_exponent_scan(const BoundarySystem& bs, const std::vector<double>& lambdas, double r);

/// Exact L^r norm of d(s) = cosh(sqrt(l) s) / (sqrt(l) sinh(sqrt(l))) by
/// adaptive Simpson quadrature.
double dirichlet_profile_norm(double lambda, double r);

struct InterpolationCheck {
  bool holds = true;
  double min_slack = 0.0;  // min over eps of rhs - lhs
  double eps_at_min = 0.0;
};

/// |f'|_r <= (9/eps)|f|_r + eps |f''|_r for each eps, given samples of f, f'
/// and f'' on the uniform grid of [0,1].
InterpolationCheck interpolation_inequality_check(const std::vector<double>& f,
                                                  const std::vector<double>& df,
                                                  const std::vector<double>& d2f,
                                                  const std::vector<double>& eps_grid, double r);

struct AdjointBReport {
  double concentration = 0.0;  // share of |B* v| mass within 3 cells of s = 1
  double pairing_residual = 0.0;
  CMatrix b_adjoint;           // 1 x n_state functional
};

/// Adjoint of u -> B u in the trapezoid inner product.
AdjointBReport adjoint_B_check(const BoundarySystem& bs, cplx lambda = 1.0);

struct PdeRun {
  BochnerSignal z;
  MaxRegReport report;
  double norm_dz = 0.0;
  double norm_z = 0.0;
  double norm_Gz = 0.0;
  double norm_f = 0.0;
};

/// z' = A_pert z + f, z(0) = 0 with the maximal regularity report.
PdeRun run_pde(const HeatConfig& cfg, const BochnerSignal& f, bool with_report = true);

/// Residual |A_pert w(T) + f_bar| / |f_bar| after evolving from 0 with the
/// constant-in-time forcing f_bar = s^2 - (null-mode component). Constants
/// span ker A_pert, so f = 1 itself gives w(t) = t and no steady state.
double heat_steady_state_residual(const HeatConfig& cfg, double T);

/// Vector spanning ker A_pert and its left counterpart (normalized).
struct NullPair {
  CVector right;
  CVector left;
};
NullPair null_pair(const CMatrix& a);

/// F = (-A_pert)^theta on the complement of the null mode, built via the
/// eigendecomposition of the symmetrized operator or via the contour.
CMatrix heat_fractional_F(const CMatrix& a_pert, double theta, bool via_contour);

struct PideRun {
  BochnerSignal rho;
  MaxRegReport report;
  double cross_check = 0.0;  // direct vs companion first component
  double dual_path = 0.0;    // F via contour vs eigendecomposition
  bool horizon_flag = false;
};

PideRun run_pide(const HeatConfig& cfg, const KernelSpec& kernel, const BochnerSignal& f,
                 int mem_nodes, bool with_report = true, bool with_dual_path = true);

}  // namespace mrlab
