#pragma once

// Dense complex linear algebra used by every other module: matrix
// exponentials and phi-functions, resolvents, spectra and L^p operator norms.

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mrlab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when lambda*I - A is numerically singular.
class SpectrumError : public LinalgError {
 public:
  SpectrumError(cplx lambda, double smallest_sv, const std::string& what = "lambda in spectrum");
  cplx lambda() const { return lambda_; }
  double smallest_singular_value() const { return smallest_sv_; }

 private:
  cplx lambda_;
  double smallest_sv_;
};

void require_square(const CMatrix& a, const char* what);
void require_finite(const CMatrix& a, const char* what);
bool is_real(const CMatrix& a, double tol = 0.0);

/// e^{tA} by scaling and squaring with the degree-13 diagonal Pade approximant.
CMatrix expm(const CMatrix& a, double t);

/// \int_0^t e^{sA} ds, computed from the exponential of [[A, I], [0, 0]].
CMatrix phi1(const CMatrix& a, double t);

/// Both e^{tA} and (\int_0^t e^{sA} ds) * b from a single augmented exponential.
/// Cheaper than phi1() when b has few columns.
struct ExpPhi {
  CMatrix exp;
  CMatrix phi_b;
};
ExpPhi exp_phi_apply(const CMatrix& a, double t, const CMatrix& b);

/// (lambda*I - A)^{-1}. Throws SpectrumError when the system's condition
/// number exceeds `cond_cap`.
CMatrix resolvent(const CMatrix& a, cplx lambda, double cond_cap = 1e12);

double smallest_singular_value(const CMatrix& m);
double spectral_norm(const CMatrix& m);
double condition_number(const CMatrix& m);

struct Spectrum {
  CVector values;
  CMatrix vectors;  // empty unless requested
  bool orthogonal = false;
};

/// Eigenvalues (and optionally eigenvectors). Real symmetric input goes
/// through the self-adjoint solver and yields an orthonormal basis.
Spectrum eig(const CMatrix& a, bool want_vectors = false);

/// max Re(eig(A)).
double spectral_abscissa(const CMatrix& a);

/// n-point Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Composite Gauss-Legendre rule on [a, b]: `panels` panels of `order` points.
void composite_gauss(double a, double b, int panels, int order, std::vector<double>& nodes,
                     std::vector<double>& weights);

// ---------------------------------------------------------------------------
// Operator norms between mixed l^p(l^2) spaces.

/// Norm on C^{blocks*block_size}: (sum_k w_k |x_k|_2^p)^{1/p} where x_k is the
/// k-th block. Empty weights mean unit weights.
struct LpNormSpec {
  double p = 2.0;
  Index block_size = 1;
  std::vector<double> weights;

  double q() const;
  double norm(const CVector& x) const;
  double dual_norm(const CVector& y) const;
  /// y with <y, x> = |x| and dual_norm(y) = 1.
  CVector dual_of(const CVector& x) const;
  /// x with <z, x> = dual_norm(z) and norm(x) = 1.
  CVector primal_of(const CVector& z) const;
  double weight(Index k) const { return weights.empty() ? 1.0 : weights[static_cast<size_t>(k)]; }
};

/// Matrix-free linear map with its adjoint, for operators too large to
/// assemble (block convolution operators on long time grids).
struct LinearOperator {
  Index rows = 0;
  Index cols = 0;
  std::function<CVector(const CVector&)> apply;
  std::function<CVector(const CVector&)> apply_adjoint;

  static LinearOperator from_matrix(const CMatrix& m);
};

struct NormEstimate {
  double value = 0.0;
  std::string method;  // "svd-exact", "lanczos" or "power-probe"
  int iterations = 0;
  bool converged = true;
};

struct NormOptions {
  int restarts = 16;
  int max_iterations = 200;
  double rel_tol = 1e-6;
  std::uint64_t seed = 20240611;
  Index dense_limit = 1200;  // assemble and use the SVD below this size
  int lanczos_steps = 120;
};

/// Operator norm of M : (C^cols, in) -> (C^rows, out). For p = 2 this is exact
/// (SVD) or a Lanczos estimate for large operators; otherwise a lower bound
/// from Boyd's power method with random restarts.
NormEstimate opnorm(const LinearOperator& m, const LpNormSpec& in, const LpNormSpec& out,
                    const NormOptions& opts = {});
NormEstimate opnorm(const CMatrix& m, const LpNormSpec& spec, const NormOptions& opts = {});

/// Largest singular value by Golub-Kahan-Lanczos with full reorthogonalization.
NormEstimate lanczos_norm(const LinearOperator& m, const NormOptions& opts = {});

/// Boyd's p-norm power iteration. Always returns a lower bound.
NormEstimate boyd_norm(const LinearOperator& m, const LpNormSpec& in, const LpNormSpec& out,
                       const NormOptions& opts = {});

}  // namespace mrlab
