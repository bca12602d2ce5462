#include "mrlab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>

#include "mrlab/boundary.hpp"

namespace mrlab {

Generator Generator::make(CMatrix a, std::string label) {
  require_square(a, "Generator");
  require_finite(a, "Generator");
  Generator g;
  g.omega0 = spectral_abscissa(a);
  g.A = std::move(a);
  g.label = std::move(label);
  return g;
}

int ScanReport::flagged_count() const {
  return static_cast<int>(std::count(flagged.begin(), flagged.end(), true));
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0 && hi > lo) || per_decade < 1) throw LinalgError("log_grid: need 0 < lo < hi");
  const double decades = std::log10(hi / lo);
  const int n = std::max(2, static_cast<int>(std::lround(decades * per_decade)) + 1);
  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    g[static_cast<size_t>(i)] = lo * std::pow(10.0, decades * i / (n - 1));
  }
  return g;
}

std::vector<double> default_scan_grid(int per_decade) { return log_grid(1e-2, 1e4, per_decade); }

std::vector<cplx> halfplane_grid(double omega, double r_lo, double r_hi, int per_decade,
                                 int n_angles) {
  const auto radii = log_grid(r_lo, r_hi, per_decade);
  const int half = n_angles / 2;
  std::vector<cplx> out;
  out.reserve(radii.size() * static_cast<size_t>(2 * half + 1));
  for (double r : radii) {
    for (int j = -half; j <= half; ++j) {
      const double phi = 0.5 * std::numbers::pi * j / (half + 1);
      out.push_back(omega + std::polar(r, phi));
    }
  }
  return out;
}

namespace {

// Evaluates value(point) over a grid, flags spectral hits, and refines the
// sup by golden-section search in log|param| around the best grid point.
struct ScanBuilder {
  ScanReport r;

  void add(cplx point, double param, const std::function<double()>& eval) {
    r.grid.push_back(point);
    r.param.push_back(param);
    try {
      r.values.push_back(eval());
      r.flagged.push_back(false);
    } catch (const SpectrumError&) {
      r.values.push_back(0.0);
      r.flagged.push_back(true);
    }
  }

  void finish() {
    if (r.grid.empty()) throw LinalgError("scan grid must be nonempty");
    std::optional<size_t> best;
    for (size_t i = 0; i < r.values.size(); ++i) {
      if (r.flagged[i]) continue;
      if (!best || r.values[i] > r.values[*best]) best = i;
    }
    r.sup = best ? r.values[*best] : 0.0;
    r.argmax = r.grid[best.value_or(0)];
    r.verdict = extent_verdict(r);
  }
};

// Golden-section maximization of f(exp(u)) on [log a, log b].
std::pair<double, double> refine_max(const std::function<double(double)>& f, double a, double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(a), hi = std::log(b);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(std::exp(x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(std::exp(x1));
    }
  }
  return f1 > f2 ? std::pair{std::exp(x1), f1} : std::pair{std::exp(x2), f2};
}

// Scan over s in +-grid of value(s); the sup is polished by a local search.
ScanReport line_scan(const std::string& label, const std::vector<double>& s_grid,
                     const std::function<cplx(double)>& point,
                     const std::function<double(double)>& value) {
  if (s_grid.empty()) throw LinalgError("scan grid must be nonempty");
  ScanBuilder b;
  b.r.label = label;
  for (double sign : {1.0, -1.0}) {
    for (double s : s_grid) {
      const double ss = sign * s;
      b.add(point(ss), s, [&] { return value(ss); });
    }
  }
  b.finish();
  // Refine around the best grid point (skipped when it is a grid end point).
  const size_t n = s_grid.size();
  size_t best = 0;
  for (size_t i = 0; i < b.r.values.size(); ++i) {
    if (!b.r.flagged[i] && b.r.values[i] >= b.r.values[best]) best = i;
  }
  const size_t k = best % n;
  const double sign = best < n ? 1.0 : -1.0;
  if (k > 0 && k + 1 < n) {
    try {
      auto f = [&](double s) { return value(sign * s); };
      const auto [s_star, v_star] = refine_max(f, s_grid[k - 1], s_grid[k + 1]);
      if (v_star > b.r.sup) {
        b.r.sup = v_star;
        b.r.argmax = point(sign * s_star);
      }
    } catch (const SpectrumError&) {
    }
  }
  return b.r;
}

}  // namespace

std::string extent_verdict(const ScanReport& r) {
  double pmin = INFINITY, pmax = 0.0;
  for (double p : r.param) {
    pmin = std::min(pmin, p);
    pmax = std::max(pmax, p);
  }
  const double mid = std::sqrt(pmin * pmax);
  double sup_low = 0.0, sup_last = 0.0;
  for (size_t i = 0; i < r.values.size(); ++i) {
    if (r.flagged[i]) continue;
    if (r.param[i] <= mid) sup_low = std::max(sup_low, r.values[i]);
    if (r.param[i] >= pmax / 10.0) sup_last = std::max(sup_last, r.values[i]);
  }
  const bool growing = sup_last >= r.sup * (1.0 - 1e-12) && sup_last > 10.0 * sup_low;
  return growing ? "unbounded-looking" : "bounded";
}

std::string family_verdict(const std::vector<double>& sups) {
  if (sups.size() < 2) return "bounded";
  return sups.back() > 10.0 * sups.front() ? "unbounded-looking" : "bounded";
}

ScanReport analyticity_scan(const Generator& gen, double omega, const std::vector<cplx>& grid) {
  if (!(omega > gen.omega0)) {
    throw LinalgError("analyticity_scan: omega must exceed the growth bound " +
                      std::to_string(gen.omega0));
  }
  ScanBuilder b;
  b.r.label = "analyticity:" + gen.label;
  for (cplx lambda : grid) {
    if (!(lambda.real() > omega)) throw LinalgError("analyticity_scan: grid point outside Re > omega");
    b.add(lambda, std::abs(lambda - omega),
          [&] { return std::abs(lambda - omega) * spectral_norm(resolvent(gen.A, lambda)); });
  }
  b.finish();
  return b.r;
}

ScanReport weis_scan(const Generator& gen, const std::vector<double>& s_grid) {
  for (double s : s_grid) {
    if (!(s > 0.0)) throw LinalgError("weis_scan: grid must be positive");
  }
  const cplx i(0.0, 1.0);
  return line_scan(
      "weis:" + gen.label, s_grid, [&](double s) { return i * s; },
      [&](double s) { return std::abs(s) * spectral_norm(resolvent(gen.A, i * s)); });
}

std::pair<ScanReport, ScanReport> fractional_scans(const Generator& gen, const CMatrix& b,
                                                   const CMatrix& c, double omega, double exp_b,
                                                   double exp_c, const std::vector<double>& s_grid) {
  if (!(omega > gen.omega0)) throw LinalgError("fractional_scans: omega must exceed the growth bound");
  if (b.rows() != gen.dim() || c.cols() != gen.dim()) {
    throw LinalgError("fractional_scans: dimension mismatch");
  }
  const cplx i(0.0, 1.0);
  auto point = [&](double s) { return omega + i * s; };
  auto solve_b = [&](double s) {
    CMatrix shifted = -gen.A;
    shifted.diagonal().array() += point(s);
    return CMatrix(shifted.partialPivLu().solve(b));
  };
  auto solve_c = [&](double s) {
    CMatrix shifted = -gen.A;
    shifted.diagonal().array() += point(s);
    // C R = (R^H C^H)^H
    return CMatrix(shifted.adjoint().partialPivLu().solve(c.adjoint()).adjoint());
  };
  ScanReport rb = line_scan("fractional-B:" + gen.label, s_grid, point, [&](double s) {
    return std::pow(std::abs(s), exp_b) * spectral_norm(solve_b(s));
  });
  ScanReport rc = line_scan("fractional-C:" + gen.label, s_grid, point, [&](double s) {
    return std::pow(std::abs(s), exp_c) * spectral_norm(solve_c(s));
  });
  return {rb, rc};
}

CMatrix yosida_approx(const Generator& gen, double n) {
  if (!(n > gen.omega0)) throw LinalgError("yosida_approx: n must exceed the growth bound");
  CMatrix out = n * n * resolvent(gen.A, n);
  out.diagonal().array() -= n;
  return out;
}

double yosida_split_check(const BoundarySystem& bs, double n) {
  const CMatrix a = bs.realize_A().A;
  const CMatrix a_pert = bs.realize_perturbed().A;
  const CMatrix c = bs.k_state();
  const CMatrix d = bs.dirichlet(n).D;
  const Index m = c.rows();
  CMatrix feedback = CMatrix::Identity(m, m) - c * d;
  Eigen::PartialPivLU<CMatrix> lu(feedback);
  if (!(lu.rcond() > 1e-12)) {
    throw LinalgError("feedback obstruction at n=" + std::to_string(n) +
                      ": I - C D_n is singular");
  }
  const CMatrix r = resolvent(a, n);
  const CMatrix r_pert = resolvent(a_pert, n);
  CMatrix lhs = n * n * r_pert;
  lhs.diagonal().array() -= n;
  const CMatrix rhs = n * a * r + n * n * d * lu.solve(c * r);
  return spectral_norm(lhs - rhs) / spectral_norm(n * n * r_pert);
}

}  // namespace mrlab
