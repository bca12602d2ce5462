#include <doctest.h>

#include "helpers.hpp"
#include "mrlab/heat.hpp"

using namespace mrlab;
using namespace testutil;

namespace {

BochnerSignal smooth(const TimeGrid& g, Index n) {
  return BochnerSignal::sample(g, n, [n](double t) {
    CVector v(n);
    for (Index i = 0; i < n; ++i) v(i) = std::cos(M_PI * i / (n - 1.0)) * (1.0 + t) + 0.5;
    return v;
  });
}

}  // namespace

TEST_CASE("grid and boundary functional") {
  const BoundarySystem bs = build_heat(32);
  const Index n = bs.n_state();
  CHECK(n == 33);
  const auto s = heat_nodes(bs);
  CHECK(s.front() == 0.0);
  CHECK(s.back() == 1.0);
  const CMatrix a = bs.realize_A().A;
  CHECK((a * CVector::Ones(n)).norm() <= 1e-12 * spectral_norm(a));
  CHECK((bs.realize_perturbed().A * CVector::Ones(n)).norm() <= 1e-12 * spectral_norm(a));
  for (int k = 1; k <= 4; ++k) {
    CVector c(n);
    for (Index i = 0; i < n; ++i) c(i) = std::cos(k * M_PI * s[static_cast<size_t>(i)]);
    CHECK(std::abs((bs.k_state() * c)(0, 0) - (k % 2 ? -2.0 : 0.0)) <= 1e-12);
  }
  CHECK(std::abs((heat_average_row(bs) * CVector::Ones(n))(0, 0) - 1.0) <= 1e-14);
  CHECK(std::abs(spatial_norm(bs, CVector::Constant(n, 3.0), 1.5) - 3.0) <= 1e-13);
}

TEST_CASE("config validation") {
  HeatConfig c;
  CHECK(c.validate().empty());
  c.N = 4;
  CHECK_THROWS_AS(c.validate(), LinalgError);
  c = {};
  c.theta_frac = 0.6;
  CHECK_THROWS_AS(c.validate(), LinalgError);
  c.allow_theta_override = true;
  CHECK_NOTHROW(c.validate());
  c = {};
  c.p = 3.0;
  CHECK_FALSE(c.validate().empty());  // outside the admissibility window: warning only
}

TEST_CASE("constant forcing grows linearly") {
  // Constants span the kernel of the perturbed generator, so f = 1 has no
  // steady state: w(t) = t exactly.
  HeatConfig c;
  c.N = 16;
  const BoundarySystem bs = build_heat(c);
  const Index n = bs.n_state();
  const TimeGrid g = TimeGrid::make(2.0, 64);
  const BochnerSignal w = evolve(bs.realize_perturbed(), CVector::Zero(n),
                                 BochnerSignal::sample(g, n, [n](double) { return CVector::Ones(n); }));
  CHECK((w.at(g.n) - CVector::Constant(n, 2.0)).norm() <= 1e-10);
}

TEST_CASE("steady state of the centred forcing") {
  HeatConfig c;
  c.N = 32;
  const double r1 = heat_steady_state_residual(c, 1.0);
  const double r2 = heat_steady_state_residual(c, 2.0);
  CHECK(heat_steady_state_residual(c, 5.0) <= 1e-6);
  const Spectrum sp = eig(build_heat(c).realize_perturbed().A);
  std::vector<double> re;
  for (Index i = 0; i < sp.values.size(); ++i) re.push_back(sp.values(i).real());
  std::sort(re.begin(), re.end(), std::greater<>());
  CHECK(std::abs(r2 / r1 - std::exp(re[1])) / std::exp(re[1]) <= 0.1);
}

TEST_CASE("Dirichlet decay") {
  const BoundarySystem bs = build_heat(1024);
  for (double r : {1.5, 2.0}) {
    const FavardFit fit = favard_exponent_scan(bs, log_grid(10.0, 1e4, 4), r);
    CHECK(std::abs(fit.expected + (r + 1.0) / (2.0 * r)) < 1e-15);
    CHECK(std::abs(fit.slope - fit.expected) <= 0.05);
    const double exact = dirichlet_profile_norm(100.0, r);
    CHECK(std::abs(spatial_norm(bs, bs.dirichlet(100.0).D.col(0), r) - exact) / exact <= 0.01);
  }
  // lambda -> 0 limit of the profile at r = 2 on a large lambda: |d|_2^2 ~ 1/(2 lambda^{3/2}).
  const double l = 1e4;
  CHECK(std::abs(dirichlet_profile_norm(l, 2.0) - std::sqrt(0.5 / std::pow(l, 1.5))) / dirichlet_profile_norm(l, 2.0) < 1e-3);
}

TEST_CASE("interpolation inequality") {
  const int m = 1001;
  std::vector<double> f(m), df(m), d2f(m), one(m, 1.0), zero(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const double x = static_cast<double>(i) / (m - 1);
    f[i] = std::cos(M_PI * x);
    df[i] = -M_PI * std::sin(M_PI * x);
    d2f[i] = -M_PI * M_PI * f[i];
  }
  const auto eps = log_grid(1e-2, 1e2, 10);
  CHECK(interpolation_inequality_check(f, df, d2f, eps, 2.0).holds);
  CHECK(interpolation_inequality_check(f, df, d2f, eps, 1.5).holds);
  const InterpolationCheck c = interpolation_inequality_check(one, zero, zero, eps, 2.0);
  CHECK(c.holds);
  CHECK(c.min_slack > 0.0);
  // Violated by data that is not a derivative triple.
  std::vector<double> big(m, 1e6);
  CHECK_FALSE(interpolation_inequality_check(zero, big, zero, eps, 2.0).holds);
}

TEST_CASE("adjoint of the boundary control") {
  for (int N : {32, 64}) {
    const BoundarySystem bs = build_heat(N);
    const AdjointBReport r = adjoint_B_check(bs);
    CHECK(r.concentration >= 0.95);
    CHECK(r.pairing_residual <= 1e-12);
    // The control operator is defined on the free domain: K plays no role.
    const AdjointBReport r0 = adjoint_B_check(bs.with_k(CMatrix::Zero(1, bs.n_ext())));
    CHECK(rel(r0.b_adjoint, r.b_adjoint) <= 1e-12);
  }
}

TEST_CASE("heat runs") {
  HeatConfig c;
  c.N = 32;
  c.steps = 128;
  const TimeGrid g = TimeGrid::make(1.0, 128);
  const Index n = build_heat(c).n_state();
  const PdeRun zero = run_pde(c, BochnerSignal::zeros(g, n), false);
  CHECK(zero.z.samples.norm() == 0.0);
  const PdeRun run = run_pde(c, smooth(g, n));
  CHECK((run.norm_dz + run.norm_z + run.norm_Gz) / run.norm_f <= run.report.C_est);
  HeatConfig fine = c;
  fine.N = 64;
  const PdeRun run2 = run_pde(fine, smooth(g, build_heat(fine).n_state()));
  CHECK(std::abs(run2.report.C_est - run.report.C_est) / run.report.C_est <= 0.1);

  // Without memory the integro-differential run is the plain run.
  KernelSpec none;
  none.name = "zero";
  const PideRun p = run_pide(c, none, smooth(g, n), 8, false, false);
  CHECK(rel(p.rho.samples, run.z.samples) <= 1e-12);
  CHECK(p.cross_check <= 1e-12);
}
