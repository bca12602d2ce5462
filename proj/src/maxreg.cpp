#include "mrlab/maxreg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>

namespace mrlab {

namespace {

enum class Output { R, Z, Memory };

// z_{k+1} = E z_k + Phi (f_k + m_k),  m_k = sum_{j<k} c_{k-j} F z_j,  z_0 = 0,
// in the frame where the spatial norm is Euclidean.
struct CausalSystem {
  Index dim = 0;
  int n = 0;
  double h = 0.0;
  MatrixAction gen;
  Propagator prop;
  MatrixAction F;
  std::vector<double> c;  // c_l = h a(l h)
  bool memory = false;

  CausalSystem(const CMatrix& a, const TimeGrid& grid, const MemoryTerm& mem) {
    dim = a.rows();
    n = grid.n;
    h = grid.h();
    gen = MatrixAction(a);
    prop = Propagator(a, h);
    memory = mem.active();
    if (memory) {
      if (mem.F.rows() != dim || mem.F.cols() != dim) throw LinalgError("MemoryTerm: F shape mismatch");
      if (static_cast<int>(mem.kernel.size()) < n + 1) throw LinalgError("MemoryTerm: kernel too short");
      F = MatrixAction(mem.F);
      c.resize(static_cast<size_t>(n) + 1);
      for (int l = 0; l <= n; ++l) c[static_cast<size_t>(l)] = h * mem.kernel[static_cast<size_t>(l)];
    }
  }

  // Returns z (dim x (n+1)) and the memory terms m (dim x n).
  void forward(const CMatrix& f, CMatrix& z, CMatrix& m) const {
    z = CMatrix::Zero(dim, n + 1);
    m = CMatrix::Zero(dim, n);
    CMatrix fz;
    if (memory) fz = CMatrix::Zero(dim, n + 1);
    for (int k = 0; k < n; ++k) {
      if (memory) {
        for (int j = 1; j < k; ++j) m.col(k) += c[static_cast<size_t>(k - j)] * fz.col(j);
      }
      z.col(k + 1) = prop.step(z.col(k), f.col(k) + m.col(k));
      if (memory) fz.col(k + 1) = F(z.col(k + 1));
    }
  }

  CVector apply(const CVector& x, Output out) const {
    const CMatrix f = Eigen::Map<const CMatrix>(x.data(), dim, n);
    CMatrix z, m;
    forward(f, z, m);
    CMatrix y(dim, n);
    for (int j = 1; j <= n; ++j) {
      switch (out) {
        case Output::R: y.col(j - 1) = gen(z.col(j)); break;
        case Output::Z: y.col(j - 1) = z.col(j); break;
        case Output::Memory: y.col(j - 1) = m.col(j - 1); break;
      }
    }
    return Eigen::Map<CVector>(y.data(), y.size());
  }

  // Reverse sweep of forward() for the seeds ybar.
  CVector adjoint(const CVector& ybar_flat, Output out) const {
    const CMatrix ybar = Eigen::Map<const CMatrix>(ybar_flat.data(), dim, n);
    CMatrix zbar = CMatrix::Zero(dim, n + 1);
    CMatrix mbar = CMatrix::Zero(dim, n);
    for (int j = 1; j <= n; ++j) {
      switch (out) {
        case Output::R: zbar.col(j) = gen.adjoint(ybar.col(j - 1)); break;
        case Output::Z: zbar.col(j) = ybar.col(j - 1); break;
        case Output::Memory: mbar.col(j - 1) = ybar.col(j - 1); break;
      }
    }
    CMatrix fbar(dim, n);
    for (int k = n - 1; k >= 0; --k) {
      // zbar_{k+1} is final: every later step and memory row was swept already.
      const CVector gbar = prop.Phi.adjoint(zbar.col(k + 1));
      zbar.col(k) += prop.E.adjoint(zbar.col(k + 1));
      fbar.col(k) = gbar;
      mbar.col(k) += gbar;
      if (memory && k > 1) {
        const CVector fm = F.adjoint(mbar.col(k));
        for (int j = 1; j < k; ++j) zbar.col(j) += c[static_cast<size_t>(k - j)] * fm;
      }
    }
    return Eigen::Map<CVector>(fbar.data(), fbar.size());
  }
};

CMatrix sqrt_weight_frame(const CMatrix& a, const std::vector<double>& w) {
  if (w.empty()) return a;
  if (static_cast<Index>(w.size()) != a.rows()) throw LinalgError("spatial weights: size mismatch");
  RVector s(a.rows()), si(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    s(i) = std::sqrt(w[static_cast<size_t>(i)]);
    si(i) = 1.0 / s(i);
  }
  return s.asDiagonal() * a * si.asDiagonal();
}

CMatrix scale_rows(const CMatrix& x, const std::vector<double>& w) {
  if (w.empty()) return x;
  CMatrix out = x;
  for (Index i = 0; i < x.rows(); ++i) out.row(i) *= std::sqrt(w[static_cast<size_t>(i)]);
  return out;
}

LpNormSpec time_spec(double p, Index dim, int n, double h) {
  LpNormSpec s;
  s.p = p;
  s.block_size = dim;
  s.weights.assign(static_cast<size_t>(n), h);
  return s;
}

LinearOperator make_op(const std::shared_ptr<CausalSystem>& sys, Output out) {
  LinearOperator op;
  op.rows = sys->dim * sys->n;
  op.cols = op.rows;
  op.apply = [sys, out](const CVector& x) { return sys->apply(x, out); };
  op.apply_adjoint = [sys, out](const CVector& y) { return sys->adjoint(y, out); };
  return op;
}

double lp_of_columns(const CMatrix& x, int lo, int hi, double h, double p) {
  double acc = 0.0;
  for (int k = lo; k <= hi; ++k) acc += h * std::pow(x.col(k).norm(), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

ConvolutionMaps assemble_maps(const Generator& gen, const TimeGrid& grid, double p,
                              const MaxRegOptions& opts, const MemoryTerm& memory) {
  if (!(p > 1.0)) throw LinalgError("maximal regularity needs p in (1, inf)");
  MemoryTerm mem = memory;
  if (mem.active()) mem.F = sqrt_weight_frame(mem.F, opts.spatial_weights);
  auto sys = std::make_shared<CausalSystem>(sqrt_weight_frame(gen.A, opts.spatial_weights), grid, mem);
  ConvolutionMaps maps;
  maps.R = make_op(sys, Output::R);
  maps.Z = make_op(sys, Output::Z);
  maps.in = time_spec(p, gen.dim(), grid.n, grid.h());
  maps.out = maps.in;
  return maps;
}

CMatrix assemble_R(const Generator& gen, const TimeGrid& grid) {
  const Index d = gen.dim();
  const int n = grid.n;
  const Propagator prop(gen.A, grid.h());
  // Blocks A E^l Phi for l = 0..n-1 on the block Toeplitz diagonals.
  std::vector<CMatrix> kern(static_cast<size_t>(n));
  CMatrix power = prop.Phi.matrix();
  for (int l = 0; l < n; ++l) {
    kern[static_cast<size_t>(l)] = gen.A * power;
    power = prop.E.matrix() * power;
  }
  CMatrix r = CMatrix::Zero(d * n, d * n);
  for (int j = 1; j <= n; ++j) {
    for (int k = 0; k < j; ++k) r.block((j - 1) * d, k * d, d, d) = kern[static_cast<size_t>(j - 1 - k)];
  }
  return r;
}

void witness_terms(const Generator& gen, const BochnerSignal& f, double p, MaxRegReport& rep,
                   const std::vector<double>& spatial, const MemoryTerm& memory) {
  MemoryTerm mem = memory;
  if (mem.active()) mem.F = sqrt_weight_frame(mem.F, spatial);
  const CMatrix a = sqrt_weight_frame(gen.A, spatial);
  const CausalSystem sys(a, f.grid, mem);
  const CMatrix fw = scale_rows(f.samples, spatial);
  CMatrix z, m;
  sys.forward(fw.leftCols(f.grid.n), z, m);
  const int n = f.grid.n;
  const double h = f.grid.h();
  CMatrix gz(a.rows(), n + 1), dz(a.rows(), n + 1);
  gz.col(0).setZero();
  dz.col(0).setZero();
  for (int j = 1; j <= n; ++j) {
    gz.col(j) = a * z.col(j);
    dz.col(j) = gz.col(j) + fw.col(j - 1) + m.col(j - 1);  // the equation itself
  }
  rep.norm_f = lp_of_columns(fw, 0, n - 1, h, p);
  rep.norm_z = lp_of_columns(z, 1, n, h, p);
  rep.norm_Gz = lp_of_columns(gz, 1, n, h, p);
  rep.norm_dz = lp_of_columns(dz, 1, n, h, p);
}

MaxRegReport maxreg_constant(const Generator& gen, const TimeGrid& grid, double p,
                             const BochnerSignal* witness, const MaxRegOptions& opts,
                             const MemoryTerm& memory) {
  const ConvolutionMaps maps = assemble_maps(gen, grid, p, opts, memory);
  MaxRegReport rep;
  rep.label = gen.label;
  rep.p = p;
  rep.T = grid.T;
  rep.n = grid.n;
  const NormEstimate r = opnorm(maps.R, maps.in, maps.out, opts.norm);
  const NormEstimate z = opnorm(maps.Z, maps.in, maps.out, opts.norm);
  rep.norm_R = r.value;
  rep.norm_Z = z.value;
  rep.method = r.method;
  rep.converged = r.converged && z.converged;
  double mem_norm = 0.0;
  if (memory.active()) {
    MemoryTerm mem = memory;
    mem.F = sqrt_weight_frame(mem.F, opts.spatial_weights);
    auto sys = std::make_shared<CausalSystem>(sqrt_weight_frame(gen.A, opts.spatial_weights), grid, mem);
    const NormEstimate m = opnorm(make_op(sys, Output::Memory), maps.in, maps.out, opts.norm);
    mem_norm = m.value;
    rep.converged = rep.converged && m.converged;
  }
  rep.C_est = 2.0 * rep.norm_R + mem_norm + 1.0 + rep.norm_Z;
  if (witness != nullptr) {
    if (witness->grid.n != grid.n || std::abs(witness->grid.T - grid.T) > 1e-14 * grid.T) {
      throw LinalgError("maxreg_constant: witness grid differs from the operator grid");
    }
    witness_terms(gen, *witness, p, rep, opts.spatial_weights, memory);
  }
  return rep;
}

RefinementStudy refinement_study(const Generator& gen, const TimeGrid& grid, double p,
                                 const MaxRegOptions& opts, int levels) {
  RefinementStudy st;
  for (int l = 0; l < levels; ++l) st.levels.push_back(maxreg_constant(gen, grid.refined(1 << l), p, nullptr, opts));
  bool finite = true;
  for (size_t l = 0; l < st.levels.size(); ++l) {
    finite = finite && std::isfinite(st.levels[l].C_est);
    if (l > 0) {
      const double prev = st.levels[l - 1].C_est;
      st.variation = std::max(st.variation, std::abs(st.levels[l].C_est - prev) / prev);
    }
  }
  st.stable = finite && st.variation <= 0.10;
  return st;
}

PerturbationTable perturbation_comparison(const std::vector<std::pair<std::string, Generator>>& gens,
                                          const TimeGrid& grid, double p, const MaxRegOptions& opts) {
  PerturbationTable t;
  bool all = true;
  for (const auto& [label, g] : gens) {
    RefinementStudy st = refinement_study(g, grid, p, opts);
    for (auto& lv : st.levels) lv.label = label;
    all = all && st.stable;
    t.rows.emplace_back(label, std::move(st));
  }
  t.verdict = all ? "preserved" : "not preserved";
  return t;
}

void write_table_csv(const PerturbationTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LinalgError("cannot open " + path);
  out << "label,p,T,n,C_est,method,converged\n" << std::setprecision(12);
  for (const auto& [label, st] : t.rows) {
    for (const auto& r : st.levels) {
      out << label << "," << r.p << "," << r.T << "," << r.n << "," << r.C_est << "," << r.method << ","
          << (r.converged ? "true" : "false") << "\n";
    }
  }
}

double feedback_contraction(const CMatrix& a, const CMatrix& d_mu, const CMatrix& k,
                            const TimeGrid& grid, double p, const MaxRegOptions& opts) {
  const CMatrix dk = sqrt_weight_frame(d_mu * k, opts.spatial_weights);
  const ConvolutionMaps maps = assemble_maps(Generator::make(a), grid, p, opts);
  const Index dim = a.rows();
  const int n = grid.n;
  auto blockwise = [dim, n](const CMatrix& m, const CVector& x) {
    CMatrix xm = Eigen::Map<const CMatrix>(x.data(), dim, n);
    CMatrix y = m * xm;
    return CVector(Eigen::Map<CVector>(y.data(), y.size()));
  };
  const CMatrix dk_h = dk.adjoint();
  LinearOperator op;
  op.rows = maps.R.rows;
  op.cols = maps.R.cols;
  op.apply = [=](const CVector& x) { return maps.R.apply(blockwise(dk, x)); };
  op.apply_adjoint = [=](const CVector& y) { return blockwise(dk_h, maps.R.apply_adjoint(y)); };
  return opnorm(op, maps.in, maps.out, opts.norm).value;
}

FixedPointCheck ds_fixed_point_check(const CMatrix& a, const CMatrix& a_cl, const CMatrix& d_mu,
                                     const CMatrix& k, const BochnerSignal& f, double mu, double p,
                                     const MaxRegOptions& opts) {
  const TimeGrid& grid = f.grid;
  const int n = grid.n;
  const Index dim = a.rows();
  const CMatrix dk = d_mu * k;
  const Propagator free(a, grid.h());
  const BochnerSignal z = evolve(Generator::make(a_cl), CVector::Zero(dim), f);
  const CMatrix rcl = a_cl * z.samples;  // R_cl f at every node; column 0 is zero

  // R g for a forcing read at left endpoints: A times the free solution.
  auto apply_R = [&](const CMatrix& g) {
    CMatrix w(dim, n + 1);
    w.col(0).setZero();
    for (int k2 = 0; k2 < n; ++k2) w.col(k2 + 1) = free.step(w.col(k2), g.col(k2));
    return CMatrix(a * w);
  };
  const CMatrix boundary_term = mu * dk * z.samples;
  const CMatrix f_rcl = apply_R(dk * rcl);

  const CMatrix lhs = rcl + f_rcl;
  const CMatrix rhs = apply_R(f.samples - dk * f.samples + boundary_term) + boundary_term;
  const CMatrix lhs_printed = rcl - f_rcl;
  const CMatrix rhs_printed = apply_R(f.samples + dk * f.samples + boundary_term);

  auto norm = [&](const CMatrix& x) { return lp_of_columns(scale_rows(x, opts.spatial_weights), 1, n, grid.h(), p); };
  FixedPointCheck out;
  out.mu = mu;
  const double scale = norm(rcl);
  out.residual = norm(lhs - rhs) / scale;
  out.residual_printed = norm(lhs_printed - rhs_printed) / scale;
  out.contraction = feedback_contraction(a, d_mu, k, grid, p, opts);
  return out;
}

}  // namespace mrlab
