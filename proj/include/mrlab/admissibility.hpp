#pragma once

// Admissibility constants of observation and control operators, the
// input-output map of a triple (A, B, C) on a time grid, admissible feedback
// and the regularity (zero feedthrough) test.

#include <string>
#include <vector>

#include "mrlab/linalg.hpp"
#include "mrlab/mild.hpp"
#include "mrlab/semigroup.hpp"

namespace mrlab {

struct AdmissibilityReport {
  double alpha = 0.0;
  double p = 2.0;
  double kappa = 0.0;
  std::string method;  // "svd-exact" or "power-probe"
  int probes = 0;
};

/// Observability Gramian \int_0^alpha e^{tA*} C* C e^{tA} dt, exact: Van Loan
/// on a short interval followed by interval doubling.
CMatrix observability_gramian(const CMatrix& c, const CMatrix& a, double alpha);

/// kappa = sup_{|x|=1} (\int_0^alpha |C T(t) x|^p dt)^{1/p}. p = 2 uses the
/// exact Gramian; other p use a right-endpoint rule on `steps` nodes and
/// Boyd's power method.
AdmissibilityReport obs_admissibility(const CMatrix& c, const Generator& gen, double alpha, double p,
                                      int steps = 512, const NormOptions& opts = {});

/// |Phi_{t0}| from L^p([0,t0], U) to X, with inputs constant on the `steps`
/// cells of [0, t0].
AdmissibilityReport ctrl_admissibility(const CMatrix& b, const Generator& gen, double t0, double p,
                                       int steps = 512, const NormOptions& opts = {});

/// Block matrix of u -> (C z(t_j))_{j=0..n} with z' = A z + B u, z(0) = 0 and
/// u constant on cells: block (j, k) = C e^{(j-1-k)hA} phi1(A, h) B for k < j.
struct IOOperatorMatrix {
  TimeGrid grid;
  double p = 2.0;
  Index out_dim = 0;
  Index in_dim = 0;
  CMatrix blocks;  // (n+1) out_dim x n in_dim
  double theta = 0.0;  // norm on L^p([0,T]) (outputs t_1..t_n)

  /// Strictly causal square part: outputs at t_0..t_{n-1}.
  CMatrix loop_matrix() const;
  /// Restriction to the first `steps` cells.
  IOOperatorMatrix truncated(int steps) const;
};

IOOperatorMatrix io_operator(const CMatrix& a, const CMatrix& b, const CMatrix& c, const TimeGrid& grid,
                             double p, const NormOptions& opts = {});

struct FeedbackReport {
  bool invertible = false;
  double margin = 0.0;       // smallest singular value of I - F
  double margin_half = 0.0;  // the same on [0, T/2]
};

FeedbackReport feedback_admissible(const IOOperatorMatrix& f);
FeedbackReport feedback_admissible(const CMatrix& loop_matrix);

struct RegularityReport {
  std::vector<double> tau;
  std::vector<double> values;  // (1/tau) |\int_0^tau (F u)(s) ds|
  double tail_slope = 0.0;     // mean log-log slope over the last three values
  std::string verdict;         // "regular-looking" or "not regular-looking"
};

/// Constant input u = z0; `feedthrough` (out_dim x in_dim) is added to the
/// output when given.
RegularityReport regularity_check(const IOOperatorMatrix& f, const CVector& z0,
                                  const CMatrix* feedthrough = nullptr);

struct YosidaExtensionReport {
  std::vector<double> s;
  std::vector<CVector> values;  // s C R(s, A) x
  CVector limit;                // two-point Richardson extrapolation in 1/s
  double error = 0.0;           // |limit - C x| / max(|C x|, 1e-300)
  double slope = 0.0;           // log-log slope of |s C R(s,A) x - C x|
  bool converged = false;
};

YosidaExtensionReport yosida_extension(const CMatrix& c, const Generator& gen, const CVector& x,
                                       const std::vector<double>& s_grid);

}  // namespace mrlab
