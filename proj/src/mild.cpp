#include "mrlab/mild.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mrlab {

TimeGrid TimeGrid::make(double T, int n) {
  if (!(T > 0.0) || !std::isfinite(T)) throw LinalgError("TimeGrid: T must be positive");
  if (n < 1) throw LinalgError("TimeGrid: need at least one step");
  return TimeGrid{T, n};
}

BochnerSignal BochnerSignal::zeros(const TimeGrid& grid, Index dim) {
  return BochnerSignal{grid, CMatrix::Zero(dim, grid.n + 1)};
}

BochnerSignal BochnerSignal::sample(const TimeGrid& grid, Index dim,
                                    const std::function<CVector(double)>& f) {
  BochnerSignal s = zeros(grid, dim);
  for (int k = 0; k <= grid.n; ++k) {
    const CVector v = f(grid.t(k));
    if (v.size() != dim) throw LinalgError("BochnerSignal::sample: dimension mismatch");
    s.samples.col(k) = v;
  }
  require_finite(s.samples, "BochnerSignal");
  return s;
}

double BochnerSignal::lp_norm(double p, bool state_nodes, const std::vector<double>& spatial) const {
  if (!(p >= 1.0)) throw LinalgError("lp_norm: p must be >= 1");
  const int lo = state_nodes ? 1 : 0;
  const int hi = state_nodes ? grid.n : grid.n - 1;
  double acc = 0.0;
  for (int k = lo; k <= hi; ++k) {
    double sq = 0.0;
    for (Index i = 0; i < dim(); ++i) {
      const double w = spatial.empty() ? 1.0 : spatial[static_cast<size_t>(i)];
      sq += w * std::norm(samples(i, k));
    }
    acc += grid.h() * std::pow(std::sqrt(sq), p);
  }
  return std::pow(acc, 1.0 / p);
}

void BochnerSignal::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw LinalgError("cannot open " + path);
  const bool cplx_data = samples.imag().cwiseAbs().maxCoeff() > 0.0;
  out << "t";
  for (Index i = 0; i < dim(); ++i) {
    out << ",x" << i;
    if (cplx_data) out << ",x" << i << "_im";
  }
  out << "\n" << std::setprecision(17);
  for (int k = 0; k <= grid.n; ++k) {
    out << grid.t(k);
    for (Index i = 0; i < dim(); ++i) {
      out << "," << samples(i, k).real();
      if (cplx_data) out << "," << samples(i, k).imag();
    }
    out << "\n";
  }
}

BochnerSignal BochnerSignal::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LinalgError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const bool cplx_data = header.size() >= 3 && header[2].ends_with("_im");
  const size_t cols = header.size() - 1;
  const Index dim = static_cast<Index>(cplx_data ? cols / 2 : cols);
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != header.size()) throw LinalgError("read_csv: ragged row in " + path);
    times.push_back(vals[0]);
    rows.emplace_back(vals.begin() + 1, vals.end());
  }
  if (times.size() < 2) throw LinalgError("read_csv: need at least two time nodes");
  const int n = static_cast<int>(times.size()) - 1;
  BochnerSignal s = zeros(TimeGrid::make(times.back() - times.front(), n), dim);
  for (int k = 0; k <= n; ++k) {
    for (Index i = 0; i < dim; ++i) {
      const auto& r = rows[static_cast<size_t>(k)];
      s.samples(i, k) = cplx_data ? cplx(r[2 * i], r[2 * i + 1]) : cplx(r[i], 0.0);
    }
  }
  return s;
}

MatrixAction::MatrixAction(CMatrix m) : m_(std::move(m)) {
  real_ = is_real(m_);
  if (real_) re_ = m_.real();
}

CVector MatrixAction::operator()(const CVector& x) const {
  if (!real_) return m_ * x;
  CVector out(re_.rows());
  out.real() = re_ * x.real();
  // Real data stays real; skip the second pass.
  if (x.imag().isZero(0.0)) out.imag().setZero();
  else out.imag() = re_ * x.imag();
  return out;
}

CVector MatrixAction::adjoint(const CVector& x) const {
  if (!real_) return m_.adjoint() * x;
  CVector out(re_.cols());
  out.real() = re_.transpose() * x.real();
  // Real data stays real; skip the second pass.
  if (x.imag().isZero(0.0)) out.imag().setZero();
  else out.imag() = re_.transpose() * x.imag();
  return out;
}

Propagator::Propagator(const CMatrix& a, double step) : h(step) {
  require_square(a, "Propagator");
  const Index n = a.rows();
  const ExpPhi ep = exp_phi_apply(a, step, CMatrix::Identity(n, n));
  E = MatrixAction(ep.exp);
  Phi = MatrixAction(ep.phi_b);
}

BochnerSignal evolve(const Propagator& prop, const CVector& x0, const BochnerSignal& f) {
  if (x0.size() != prop.E.rows() || f.dim() != prop.E.rows()) {
    throw LinalgError("evolve: dimension mismatch");
  }
  if (std::abs(f.grid.h() - prop.h) > 1e-14 * f.grid.T) throw LinalgError("evolve: step mismatch");
  BochnerSignal z = BochnerSignal::zeros(f.grid, x0.size());
  z.samples.col(0) = x0;
  for (int k = 0; k < f.grid.n; ++k) z.samples.col(k + 1) = prop.step(z.samples.col(k), f.samples.col(k));
  return z;
}

BochnerSignal evolve(const Generator& gen, const CVector& x0, const BochnerSignal& f) {
  return evolve(Propagator(gen.A, f.grid.h()), x0, f);
}

namespace {

double max_col_norm(const CMatrix& m) { return m.colwise().norm().maxCoeff(); }

// x_{k+1} = E x_k + Phi g_k with g_k = forcing(k), x_0 = x0.
CMatrix integrate(const Propagator& prop, const CVector& x0, int n,
                  const std::function<CVector(int)>& forcing) {
  CMatrix out(x0.size(), n + 1);
  out.col(0) = x0;
  for (int k = 0; k < n; ++k) out.col(k + 1) = prop.step(out.col(k), forcing(k));
  return out;
}

}  // namespace

ClosedLoopResidual closed_loop_vcf_residual(const CMatrix& a, const CMatrix& b, const CMatrix& c,
                                            const CMatrix& a_cl, const CVector& x0,
                                            const TimeGrid& grid) {
  if (b.rows() != a.rows() || c.cols() != a.rows() || b.cols() != c.rows()) {
    throw LinalgError("closed_loop_vcf_residual: dimension mismatch");
  }
  const int n = grid.n;
  const Propagator free(a, grid.h());
  const Propagator closed(a_cl, grid.h());
  const CMatrix bc = b * c;
  const CMatrix lhs = integrate(closed, x0, n, [&](int) { return CVector::Zero(x0.size()); });
  const CMatrix free_traj = integrate(free, x0, n, [&](int) { return CVector::Zero(x0.size()); });
  // With a bounded C the three orderings are the same sum; they differ only
  // in which semigroup carries the convolution.
  const CMatrix rhs_ws = integrate(free, x0, n, [&](int k) { return CVector(bc * lhs.col(k)); });
  const CMatrix conv2 = integrate(closed, CVector::Zero(x0.size()), n,
                                  [&](int k) { return CVector(bc * free_traj.col(k)); });
  const CMatrix rhs_mv2 = free_traj + conv2;
  const double scale = max_col_norm(lhs);
  ClosedLoopResidual r;
  r.ws = max_col_norm(lhs - rhs_ws) / scale;
  r.mv1 = r.ws;
  r.mv2 = max_col_norm(lhs - rhs_mv2) / scale;
  r.mv_gap = max_col_norm(rhs_ws - rhs_mv2) / scale;
  return r;
}

double perturbed_vcf_residual(const CMatrix& a, const CMatrix& b, const CMatrix& c,
                              const CMatrix& a_cl, const CVector& x0, const BochnerSignal& f) {
  const Propagator free(a, f.grid.h());
  const Propagator closed(a_cl, f.grid.h());
  const BochnerSignal z = evolve(closed, x0, f);
  const CMatrix bc = b * c;
  const CMatrix rhs = integrate(free, x0, f.grid.n,
                                [&](int k) { return CVector(bc * z.samples.col(k) + f.samples.col(k)); });
  const double scale = max_col_norm(z.samples);
  if (scale == 0.0) return max_col_norm(rhs);
  return max_col_norm(z.samples - rhs) / scale;
}

FixedPointResult miyadera_fixed_point(const CMatrix& a_cl, const CMatrix& p, const CVector& x0,
                                      const BochnerSignal& f) {
  if (p.rows() != a_cl.rows() || p.cols() != a_cl.cols()) {
    throw LinalgError("miyadera_fixed_point: P must match the generator's shape");
  }
  const Propagator closed(a_cl, f.grid.h());
  const Propagator pert(a_cl + p, f.grid.h());
  FixedPointResult out;
  out.z = evolve(pert, x0, f);
  const CMatrix rhs = integrate(closed, x0, f.grid.n,
                                [&](int k) { return CVector(p * out.z.samples.col(k) + f.samples.col(k)); });
  const double scale = max_col_norm(out.z.samples);
  out.residual = scale == 0.0 ? max_col_norm(rhs) : max_col_norm(out.z.samples - rhs) / scale;
  return out;
}

std::vector<double> empirical_orders(const std::vector<double>& errors) {
  std::vector<double> out;
  for (size_t i = 1; i < errors.size(); ++i) out.push_back(std::log2(errors[i - 1] / errors[i]));
  return out;
}

}  // namespace mrlab
