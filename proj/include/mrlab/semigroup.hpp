#pragma once

// Generator-level diagnostics: growth bounds, resolvent scans standing in
// for R-boundedness (finite-dimensional Hilbert state spaces), and Yosida
// approximations.

#include <string>
#include <utility>
#include <vector>

#include "mrlab/linalg.hpp"

namespace mrlab {

class BoundarySystem;

struct Generator {
  CMatrix A;
  double omega0 = 0.0;  // spectral abscissa max Re eig(A), or an upper bound for it
  std::string label;

  static Generator make(CMatrix a, std::string label = {});
  Index dim() const { return A.rows(); }
};

/// Outcome of a resolvent scan. `values[i]` belongs to `grid[i]`; points
/// that fell numerically into the spectrum are flagged and carry value 0.
struct ScanReport {
  std::string label;
  std::vector<cplx> grid;
  std::vector<double> param;  // scan parameter magnitude (|s| or |lambda - omega|)
  std::vector<double> values;
  std::vector<bool> flagged;
  double sup = 0.0;
  cplx argmax{0.0, 0.0};
  std::string verdict;  // "bounded" or "unbounded-looking"

  int flagged_count() const;
};

/// `per_decade` log-spaced points covering [lo, hi].
std::vector<double> log_grid(double lo, double hi, int per_decade);

/// Default scan grid: 60 points per decade on [1e-2, 1e4].
std::vector<double> default_scan_grid(int per_decade = 60);

/// Points omega + r e^{i phi} with r log-spaced on [r_lo, r_hi] and
/// `n_angles` angles strictly inside (-pi/2, pi/2).
std::vector<cplx> halfplane_grid(double omega, double r_lo = 1e-2, double r_hi = 1e4,
                                 int per_decade = 60, int n_angles = 9);

/// |lambda - omega| * |R(lambda, A)|_2 over the grid. Throws if omega does not
/// exceed the growth bound or the grid leaves {Re lambda > omega}.
ScanReport analyticity_scan(const Generator& gen, double omega, const std::vector<cplx>& grid);

/// |s R(is, A)|_2 over s in +-grid.
ScanReport weis_scan(const Generator& gen, const std::vector<double>& s_grid);

/// The pair sup_s |s|^{exp_b} |R(omega + is, A) B| and
/// sup_s |s|^{exp_c} |C R(omega + is, A)|.
std::pair<ScanReport, ScanReport> fractional_scans(const Generator& gen, const CMatrix& b,
                                                   const CMatrix& c, double omega, double exp_b,
                                                   double exp_c, const std::vector<double>& s_grid);

/// Labels a scan "unbounded-looking" when its sup sits in the last decade
/// of the scan parameter and exceeds the sup over the lower half of the
/// (logarithmic) parameter range by 10x. Numeric scans cannot prove
/// unboundedness; this is a heuristic.
std::string extent_verdict(const ScanReport& r);

/// Verdict for a family of sups produced while a parameter is driven towards
/// a degenerate limit (for instance a shift eps -> 0): "unbounded-looking"
/// when the last sup exceeds the first by 10x.
std::string family_verdict(const std::vector<double>& sups);

/// n^2 R(n, A) - n I.
CMatrix yosida_approx(const Generator& gen, double n);

/// Relative residual of the split
///   n^2 R(n, A_pert) - n = n A R(n, A) + n^2 D_n (I - C D_n)^{-1} C R(n, A)
/// with A, A_pert, D_n and C = K on the state grid taken from `bs`.
double yosida_split_check(const BoundarySystem& bs, double n);

}  // namespace mrlab
