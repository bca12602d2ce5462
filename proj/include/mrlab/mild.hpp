#pragma once

// Mild solutions z' = A z + f with piecewise-constant forcing, integrated
// exactly by z_{k+1} = e^{hA} z_k + phi1(A, h) f_k, and residual checks of
// the variation-of-constants identities between free and perturbed pictures.

#include <string>
#include <vector>

#include "mrlab/linalg.hpp"
#include "mrlab/semigroup.hpp"

namespace mrlab {

struct TimeGrid {
  double T = 1.0;
  int n = 1;

  static TimeGrid make(double T, int n);
  double h() const { return T / n; }
  double t(int k) const { return T * k / n; }
  TimeGrid refined(int factor) const { return make(T, n * factor); }
};

/// Samples z_0..z_n as columns. Forcing signals are read as constant on
/// [t_k, t_{k+1}); the last column is then unused.
struct BochnerSignal {
  TimeGrid grid;
  CMatrix samples;  // dim x (n+1)

  static BochnerSignal zeros(const TimeGrid& grid, Index dim);
  static BochnerSignal sample(const TimeGrid& grid, Index dim,
                              const std::function<CVector(double)>& f);

  Index dim() const { return samples.rows(); }
  CVector at(int k) const { return samples.col(k); }

  /// (sum_k h |x_k|^p)^{1/p}, over k = 0..n-1 (forcing convention) or
  /// k = 1..n (state convention). `spatial` weights the Euclidean block norm.
  double lp_norm(double p, bool state_nodes, const std::vector<double>& spatial = {}) const;

  void write_csv(const std::string& path) const;
  static BochnerSignal read_csv(const std::string& path);
};

/// Applies a fixed matrix, in real arithmetic when the matrix is real.
class MatrixAction {
 public:
  MatrixAction() = default;
  explicit MatrixAction(CMatrix m);
  CVector operator()(const CVector& x) const;
  CVector adjoint(const CVector& x) const;
  const CMatrix& matrix() const { return m_; }
  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }

 private:
  CMatrix m_;
  RMatrix re_;
  bool real_ = false;
};

/// One exact step of z' = A z + f for constant f: z -> E z + Phi f.
struct Propagator {
  MatrixAction E;
  MatrixAction Phi;
  double h = 0.0;

  Propagator() = default;
  Propagator(const CMatrix& a, double h);
  CVector step(const CVector& z, const CVector& f) const { return E(z) + Phi(f); }
};

BochnerSignal evolve(const Generator& gen, const CVector& x0, const BochnerSignal& f);
BochnerSignal evolve(const Propagator& prop, const CVector& x0, const BochnerSignal& f);

/// Closed-loop variation of constants, three orderings. All residuals are
/// max_k |lhs_k - rhs_k| / max_k |lhs_k|.
struct ClosedLoopResidual {
  double ws = 0.0;   // T_cl x = T x + int T_{-1}(t-s) B C T_cl(s) x ds
  double mv1 = 0.0;  // T_cl x = T x + int T(t-s) B C T_cl(s) x ds (Miyadera ordering)
  double mv2 = 0.0;  // T_cl x = T x + int T_cl(t-s) B C T(s) x ds (swapped)
  double mv_gap = 0.0;  // max_k |rhs1_k - rhs2_k| / max_k |lhs_k|
};

/// `a` free generator, `a_cl` the closed loop (perturbed) generator, `b`
/// control matrix, `c` the observation on the state grid.
ClosedLoopResidual closed_loop_vcf_residual(const CMatrix& a, const CMatrix& b, const CMatrix& c,
                                            const CMatrix& a_cl, const CVector& x0,
                                            const TimeGrid& grid);

/// z = evolve(a_cl, x0, f) against T(t)x0 + int T_{-1}(t-s)(B C z(s) + f(s)) ds.
double perturbed_vcf_residual(const CMatrix& a, const CMatrix& b, const CMatrix& c,
                              const CMatrix& a_cl, const CVector& x0, const BochnerSignal& f);

struct FixedPointResult {
  BochnerSignal z;
  double residual = 0.0;
};

/// z = evolve(a_cl + P, x0, f) checked against
/// z(t) = T_cl(t) x0 + int T_cl(t-s)(P z(s) + f(s)) ds.
FixedPointResult miyadera_fixed_point(const CMatrix& a_cl, const CMatrix& p, const CVector& x0,
                                      const BochnerSignal& f);

/// log2 ratios of successive entries (empirical orders under halving).
std::vector<double> empirical_orders(const std::vector<double>& errors);

}  // namespace mrlab
