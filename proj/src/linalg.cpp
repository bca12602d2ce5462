#include "mrlab/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace mrlab {

namespace {

std::string format_cplx(cplx z) {
  std::ostringstream os;
  os.precision(10);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

// Pade coefficients b_0..b_m for the diagonal approximants of degree 3..13
// and the matching 1-norm thresholds (Higham 2005).
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <typename Mat>
double one_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

template <typename Mat, size_t N>
Mat pade_low(const Mat& a, const std::array<double, N>& b) {
  const Index n = a.rows();
  const Mat ident = Mat::Identity(n, n);
  const Mat a2 = a * a;
  Mat u_inner = b[1] * ident;
  Mat v = b[0] * ident;
  Mat power = ident;
  for (size_t k = 1; 2 * k < N; ++k) {
    power = power * a2;
    u_inner += b[2 * k + 1] * power;
    v += b[2 * k] * power;
  }
  const Mat u = a * u_inner;
  return (v - u).partialPivLu().solve(v + u);
}

template <typename Mat>
Mat pade13(const Mat& a) {
  const auto& b = kPade13;
  const Index n = a.rows();
  const Mat ident = Mat::Identity(n, n);
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat u_inner =
      a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident;
  const Mat u = a * u_inner;
  const Mat v =
      a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  return (v - u).partialPivLu().solve(v + u);
}

template <typename Mat>
Mat expm_impl(const Mat& a) {
  const double nrm = one_norm(a);
  if (nrm <= kTheta3) return pade_low(a, kPade3);
  if (nrm <= kTheta5) return pade_low(a, kPade5);
  if (nrm <= kTheta7) return pade_low(a, kPade7);
  if (nrm <= kTheta9) return pade_low(a, kPade9);
  int s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta13))));
  Mat r = pade13(Mat(a * std::ldexp(1.0, -s)));
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

CMatrix expm_dispatch(const CMatrix& m) {
  if (is_real(m)) {
    const RMatrix r = m.real();
    return expm_impl(r).cast<cplx>();
  }
  return expm_impl(m);
}

}  // namespace

SpectrumError::SpectrumError(cplx lambda, double smallest_sv, const std::string& what)
    : LinalgError(what + ": lambda=" + format_cplx(lambda) +
                  " smallest singular value=" + std::to_string(smallest_sv)),
      lambda_(lambda),
      smallest_sv_(smallest_sv) {}

void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw LinalgError(std::string(what) + ": matrix must be square, got " +
                      std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

void require_finite(const CMatrix& a, const char* what) {
  if (!a.allFinite()) throw LinalgError(std::string(what) + ": non-finite entries");
}

bool is_real(const CMatrix& a, double tol) {
  return a.size() == 0 || a.imag().cwiseAbs().maxCoeff() <= tol;
}

CMatrix expm(const CMatrix& a, double t) {
  require_square(a, "expm");
  require_finite(a, "expm");
  if (!(t >= 0.0) || !std::isfinite(t)) throw LinalgError("expm: t must be finite and >= 0");
  if (t == 0.0) return CMatrix::Identity(a.rows(), a.cols());
  return expm_dispatch(a * t);
}

ExpPhi exp_phi_apply(const CMatrix& a, double t, const CMatrix& b) {
  require_square(a, "exp_phi_apply");
  require_finite(a, "exp_phi_apply");
  require_finite(b, "exp_phi_apply");
  if (b.rows() != a.rows()) throw LinalgError("exp_phi_apply: dimension mismatch");
  if (!(t >= 0.0) || !std::isfinite(t)) throw LinalgError("exp_phi_apply: t must be finite and >= 0");
  const Index n = a.rows();
  const Index m = b.cols();
  if (t == 0.0) return {CMatrix::Identity(n, n), CMatrix::Zero(n, m)};
  CMatrix aug = CMatrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * t;
  aug.topRightCorner(n, m) = b * t;
  const CMatrix e = expm_dispatch(aug);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

CMatrix phi1(const CMatrix& a, double t) {
  require_square(a, "phi1");
  return exp_phi_apply(a, t, CMatrix::Identity(a.rows(), a.cols())).phi_b;
}

double smallest_singular_value(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues().minCoeff();
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues().maxCoeff();
}

double condition_number(const CMatrix& m) {
  Eigen::BDCSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.minCoeff() == 0.0) return std::numeric_limits<double>::infinity();
  return s.maxCoeff() / s.minCoeff();
}

CMatrix resolvent(const CMatrix& a, cplx lambda, double cond_cap) {
  require_square(a, "resolvent");
  require_finite(a, "resolvent");
  const Index n = a.rows();
  CMatrix shifted = -a;
  shifted.diagonal().array() += lambda;
  Eigen::PartialPivLU<CMatrix> lu(shifted);
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || 1.0 / rcond > cond_cap) {
    throw SpectrumError(lambda, smallest_singular_value(shifted));
  }
  return lu.solve(CMatrix::Identity(n, n));
}

Spectrum eig(const CMatrix& a, bool want_vectors) {
  require_square(a, "eig");
  require_finite(a, "eig");
  Spectrum out;
  if (is_real(a)) {
    const RMatrix r = a.real();
    if ((r - r.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, r.cwiseAbs().maxCoeff())) {
      Eigen::SelfAdjointEigenSolver<RMatrix> es(
          r, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw LinalgError("eig: symmetric solver failed");
      out.values = es.eigenvalues().cast<cplx>();
      if (want_vectors) out.vectors = es.eigenvectors().cast<cplx>();
      out.orthogonal = true;
      return out;
    }
    Eigen::EigenSolver<RMatrix> es(r, want_vectors);
    if (es.info() != Eigen::Success) throw LinalgError("eig: real Schur iteration failed");
    out.values = es.eigenvalues();
    if (want_vectors) out.vectors = es.eigenvectors();
    return out;
  }
  Eigen::ComplexEigenSolver<CMatrix> es(a, want_vectors);
  if (es.info() != Eigen::Success) throw LinalgError("eig: complex Schur iteration failed");
  out.values = es.eigenvalues();
  if (want_vectors) out.vectors = es.eigenvectors();
  return out;
}

double spectral_abscissa(const CMatrix& a) {
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  return eig(a).values.real().maxCoeff();
}

// ---------------------------------------------------------------------------

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw LinalgError("gauss_legendre: n must be positive");
  nodes.assign(static_cast<size_t>(n), 0.0);
  weights.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<size_t>(i)] = -x;
    nodes[static_cast<size_t>(n - 1 - i)] = x;
    weights[static_cast<size_t>(i)] = w;
    weights[static_cast<size_t>(n - 1 - i)] = w;
  }
}

void composite_gauss(double a, double b, int panels, int order, std::vector<double>& nodes,
                     std::vector<double>& weights) {
  if (panels < 1) throw LinalgError("composite_gauss: need at least one panel");
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  nodes.clear();
  weights.clear();
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    for (int i = 0; i < order; ++i) {
      nodes.push_back(mid + 0.5 * width * x[static_cast<size_t>(i)]);
      weights.push_back(0.5 * width * w[static_cast<size_t>(i)]);
    }
  }
}

double LpNormSpec::q() const {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

double LpNormSpec::norm(const CVector& x) const {
  const Index blocks = x.size() / block_size;
  double acc = 0.0;
  for (Index k = 0; k < blocks; ++k) {
    acc += weight(k) * std::pow(x.segment(k * block_size, block_size).norm(), p);
  }
  return std::pow(acc, 1.0 / p);
}

double LpNormSpec::dual_norm(const CVector& y) const {
  const double qq = q();
  const Index blocks = y.size() / block_size;
  double acc = 0.0;
  for (Index k = 0; k < blocks; ++k) {
    acc += std::pow(weight(k), 1.0 - qq) * std::pow(y.segment(k * block_size, block_size).norm(), qq);
  }
  return std::pow(acc, 1.0 / qq);
}

CVector LpNormSpec::dual_of(const CVector& x) const {
  const double nx = norm(x);
  CVector y = CVector::Zero(x.size());
  if (nx == 0.0) return y;
  const Index blocks = x.size() / block_size;
  for (Index k = 0; k < blocks; ++k) {
    const auto seg = x.segment(k * block_size, block_size);
    const double nk = seg.norm();
    if (nk == 0.0) continue;
    y.segment(k * block_size, block_size) = (weight(k) * std::pow(nk, p - 2.0) / std::pow(nx, p - 1.0)) * seg;
  }
  return y;
}

CVector LpNormSpec::primal_of(const CVector& z) const {
  const double qq = q();
  const double nz = dual_norm(z);
  CVector x = CVector::Zero(z.size());
  if (nz == 0.0) return x;
  const Index blocks = z.size() / block_size;
  for (Index k = 0; k < blocks; ++k) {
    const auto seg = z.segment(k * block_size, block_size);
    const double nk = seg.norm();
    if (nk == 0.0) continue;
    x.segment(k * block_size, block_size) =
        (std::pow(weight(k), 1.0 - qq) * std::pow(nk, qq - 2.0) / std::pow(nz, qq - 1.0)) * seg;
  }
  return x;
}

LinearOperator LinearOperator::from_matrix(const CMatrix& m) {
  LinearOperator op;
  op.rows = m.rows();
  op.cols = m.cols();
  op.apply = [m](const CVector& x) -> CVector { return m * x; };
  op.apply_adjoint = [m](const CVector& y) -> CVector { return m.adjoint() * y; };
  return op;
}

namespace {

CVector random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
  return v / v.norm();
}

// Weighted-l2 similarity: M~ = D_out M D_in^{-1} with D = sqrt(weight) per block.
LinearOperator scale_for_l2(const LinearOperator& m, const LpNormSpec& in, const LpNormSpec& out) {
  auto scale = [](const LpNormSpec& s, CVector v, bool inverse) {
    if (s.weights.empty()) return v;
    const Index blocks = v.size() / s.block_size;
    for (Index k = 0; k < blocks; ++k) {
      const double f = std::sqrt(s.weight(k));
      v.segment(k * s.block_size, s.block_size) *= inverse ? 1.0 / f : f;
    }
    return v;
  };
  LinearOperator r;
  r.rows = m.rows;
  r.cols = m.cols;
  r.apply = [=](const CVector& x) { return scale(out, m.apply(scale(in, x, true)), false); };
  r.apply_adjoint = [=](const CVector& y) {
    return scale(in, m.apply_adjoint(scale(out, y, false)), true);
  };
  return r;
}

CMatrix assemble(const LinearOperator& m) {
  CMatrix out(m.rows, m.cols);
  CVector e = CVector::Zero(m.cols);
  for (Index j = 0; j < m.cols; ++j) {
    e[j] = 1.0;
    out.col(j) = m.apply(e);
    e[j] = 0.0;
  }
  return out;
}

}  // namespace

NormEstimate lanczos_norm(const LinearOperator& m, const NormOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const int kmax = static_cast<int>(std::min<Index>({static_cast<Index>(opts.lanczos_steps), m.rows, m.cols}));
  std::vector<CVector> us, vs;
  std::vector<double> alpha, beta;
  CVector v = random_unit(m.cols, rng);
  vs.push_back(v);
  double prev = 0.0;
  NormEstimate est{0.0, "lanczos", 0, false};
  for (int j = 0; j < kmax; ++j) {
    CVector u = m.apply(vs.back());
    if (j > 0) u -= beta.back() * us.back();
    for (const auto& w : us) u -= w * w.dot(u);
    for (const auto& w : us) u -= w * w.dot(u);
    const double a = u.norm();
    alpha.push_back(a);
    const int k = static_cast<int>(alpha.size());
    RMatrix bidiag = RMatrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      bidiag(i, i) = alpha[static_cast<size_t>(i)];
      if (i + 1 < k) bidiag(i, i + 1) = beta[static_cast<size_t>(i)];
    }
    Eigen::JacobiSVD<RMatrix> svd(bidiag);
    est.value = svd.singularValues()(0);
    est.iterations = k;
    if (a <= 1e-14 * std::max(1.0, est.value)) {
      est.converged = true;
      break;
    }
    us.push_back(u / a);
    if (j > 0 && std::abs(est.value - prev) <= 1e-13 * est.value) {
      est.converged = true;
      break;
    }
    prev = est.value;
    CVector w = m.apply_adjoint(us.back()) - a * vs.back();
    for (const auto& x : vs) w -= x * x.dot(w);
    for (const auto& x : vs) w -= x * x.dot(w);
    const double b = w.norm();
    if (b <= 1e-14 * std::max(1.0, est.value)) {
      est.converged = true;
      break;
    }
    beta.push_back(b);
    vs.push_back(w / b);
  }
  if (kmax == std::min(m.rows, m.cols)) est.converged = true;
  return est;
}

NormEstimate boyd_norm(const LinearOperator& m, const LpNormSpec& in, const LpNormSpec& out,
                       const NormOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  NormEstimate best{0.0, "power-probe", 0, true};
  bool all_converged = true;
  for (int r = 0; r < opts.restarts; ++r) {
    CVector x = in.primal_of(in.dual_of(random_unit(m.cols, rng)));
    x /= in.norm(x);
    double est = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
      const CVector y = m.apply(x);
      const double next = out.norm(y);
      if (next == 0.0) {
        est = 0.0;
        converged = true;
        break;
      }
      const CVector z = m.apply_adjoint(out.dual_of(y));
      const double zn = in.dual_norm(z);
      const bool stationary = zn <= z.dot(x).real() * (1.0 + 1e-12);
      const bool small_change = it > 0 && std::abs(next - est) <= opts.rel_tol * next;
      est = std::max(est, next);
      if (stationary || small_change) {
        converged = true;
        break;
      }
      x = in.primal_of(z);
    }
    best.iterations += it + 1;
    all_converged = all_converged && converged;
    best.value = std::max(best.value, est);
  }
  best.converged = all_converged;
  return best;
}

NormEstimate opnorm(const LinearOperator& m, const LpNormSpec& in, const LpNormSpec& out,
                    const NormOptions& opts) {
  if (m.rows == 0 || m.cols == 0) return {0.0, "svd-exact", 0, true};
  if (in.p == 2.0 && out.p == 2.0) {
    const LinearOperator scaled = scale_for_l2(m, in, out);
    if (std::max(m.rows, m.cols) <= opts.dense_limit) {
      return {spectral_norm(assemble(scaled)), "svd-exact", 1, true};
    }
    return lanczos_norm(scaled, opts);
  }
  return boyd_norm(m, in, out, opts);
}

NormEstimate opnorm(const CMatrix& m, const LpNormSpec& spec, const NormOptions& opts) {
  require_finite(m, "opnorm");
  if (spec.p == 2.0 && spec.weights.empty()) return {spectral_norm(m), "svd-exact", 1, true};
  return opnorm(LinearOperator::from_matrix(m), spec, spec, opts);
}

}  // namespace mrlab
