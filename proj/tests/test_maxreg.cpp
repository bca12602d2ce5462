#include <doctest.h>

#include "helpers.hpp"
#include "mrlab/heat.hpp"
#include "mrlab/maxreg.hpp"

using namespace mrlab;
using namespace testutil;

namespace {

// Norm of f -> \int_0^t e^{-(t-s)} f(s) ds on L^2(0,1): sigma = 1/sqrt(1+w^2)
// with w the first positive root of tan w = -w.
double scalar_volterra_norm() {
  double lo = 1.6, hi = 3.1;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::tan(mid) + mid > 0.0 ? hi : lo) = mid;
  }
  const double w = 0.5 * (lo + hi);
  return 1.0 / std::sqrt(1.0 + w * w);
}

Generator upwind_shift(int m) {
  CMatrix d = CMatrix::Zero(m, m);
  d.diagonal().setConstant(-static_cast<double>(m));
  d.diagonal(1).setConstant(static_cast<double>(m));
  return Generator::make(d);
}

}  // namespace

TEST_CASE("convolution operator of the zero generator vanishes") {
  CHECK(assemble_R(Generator::make(CMatrix::Zero(2, 2)), TimeGrid::make(1.0, 16)).norm() == 0.0);
}

TEST_CASE("scalar maximal regularity against the continuum norm") {
  const Generator g = Generator::make(scalar(-1.0));
  const double sigma = scalar_volterra_norm();
  CHECK(std::abs(sigma - 0.44207) < 1e-4);
  const MaxRegReport coarse = maxreg_constant(g, TimeGrid::make(1.0, 128), 2.0);
  const MaxRegReport fine = maxreg_constant(g, TimeGrid::make(1.0, 1280), 2.0);
  CHECK(std::abs(coarse.norm_R - fine.norm_R) / fine.norm_R < 0.05);
  CHECK(std::abs(fine.norm_R - sigma) / sigma < 0.01);
  CHECK(std::abs(fine.C_est - (1.0 + 3.0 * sigma)) / (1.0 + 3.0 * sigma) < 0.01);
  // Matrix-free and dense paths agree.
  CHECK(std::abs(spectral_norm(assemble_R(g, TimeGrid::make(1.0, 128))) / std::sqrt(1.0) - coarse.norm_R) < 1e-8);
  const RefinementStudy st = refinement_study(g, TimeGrid::make(1.0, 128), 2.0);
  CHECK(st.variation < 0.05);
  CHECK(st.stable);
}

TEST_CASE("non-analytic shift germ: the convolution norm keeps growing") {
  std::vector<double> norms;
  for (int m : {16, 64, 256}) norms.push_back(maxreg_constant(upwind_shift(m), TimeGrid::make(1.0, m), 2.0).norm_R);
  CHECK(norms[1] > norms[0] * 1.2);
  CHECK(norms[2] > norms[1] * 1.2);
}

TEST_CASE("witness terms") {
  const Generator g = Generator::make(scalar(-1.0));
  const TimeGrid grid = TimeGrid::make(1.0, 64);
  MaxRegReport rep;
  witness_terms(g, BochnerSignal::zeros(grid, 1), 2.0, rep);
  CHECK(rep.norm_dz == 0.0);
  CHECK(rep.norm_z == 0.0);
  CHECK(rep.norm_Gz == 0.0);
  const BochnerSignal f = BochnerSignal::sample(grid, 1, [](double t) { return CVector::Constant(1, std::cos(3.0 * t)); });
  const MaxRegReport r = maxreg_constant(g, grid, 2.0, &f);
  CHECK((r.norm_dz + r.norm_z + r.norm_Gz) / r.norm_f <= r.C_est);
}

TEST_CASE("heat maximal regularity is uniform in N") {
  for (double p : {2.0, 3.0}) {
    std::vector<double> c;
    for (int N : {32, 64}) {
      const BoundarySystem bs = build_heat(N);
      MaxRegOptions o;
      o.spatial_weights = bs.weights();
      c.push_back(maxreg_constant(bs.realize_perturbed(), TimeGrid::make(1.0, p == 2.0 ? 256 : 64), p, nullptr, o).C_est);
    }
    CHECK(std::abs(c[0] - c[1]) / c[1] < 0.10);
  }
}

TEST_CASE("perturbation comparison") {
  const BoundarySystem bs = build_heat(16);
  const BoundarySystem free = bs.with_k(CMatrix::Zero(1, bs.n_ext()));
  MaxRegOptions o;
  o.spatial_weights = bs.weights();
  const TimeGrid grid = TimeGrid::make(1.0, 64);
  const Generator a = free.realize_A();
  const PerturbationTable same = perturbation_comparison(
      {{"A", a}, {"A+P", a}, {"A_pert", free.realize_perturbed()}, {"A_pert+P", free.realize_perturbed()}}, grid, 2.0, o);
  for (const auto& [label, st] : same.rows) CHECK(st.levels.front().C_est == same.rows.front().second.levels.front().C_est);

  const CMatrix a0 = bs.realize_A().A;
  const CMatrix frac = heat_fractional_F(a0, 1.0 / 3.0, false);
  std::vector<double> c;
  for (double eps : {0.0, 0.1, 0.5}) {
    const Generator ge = Generator::make(bs.realize_perturbed().A + eps * frac);
    c.push_back(maxreg_constant(ge, grid, 2.0, nullptr, o).C_est);
  }
  for (double v : c) CHECK(std::isfinite(v));
  CHECK(std::abs(c[1] - c[0]) <= std::abs(c[2] - c[0]) + 1e-12);
  CHECK(std::abs(c[2] - c[0]) / c[0] < 0.5);

  const PerturbationTable t = perturbation_comparison(
      {{"A", bs.realize_A()}, {"A+P", Generator::make(a0 + 0.1 * frac)}, {"A_pert", bs.realize_perturbed()},
       {"A_pert+P", Generator::make(bs.realize_perturbed().A + 0.1 * frac)}},
      grid, 2.0, o);
  CHECK(t.verdict == "preserved");
}

TEST_CASE("boundary perturbation fixed point identity") {
  const BoundarySystem base = build_heat(32);
  CMatrix avg = CMatrix::Zero(1, base.n_ext());
  for (Index i = 0; i < base.n_state(); ++i) avg(0, base.state_index()[static_cast<size_t>(i)]) = base.weights()[static_cast<size_t>(i)];
  const BoundarySystem bs = base.with_k(avg);
  MaxRegOptions o;
  o.spatial_weights = bs.weights();
  const Index n = bs.n_state();
  const auto s = heat_nodes(bs);
  auto forcing = [&](int steps) {
    return BochnerSignal::sample(TimeGrid::make(1.0, steps), n, [&](double t) {
      CVector v(n);
      for (Index i = 0; i < n; ++i) v(i) = std::cos(M_PI * s[static_cast<size_t>(i)]) * (1.0 + t) + 0.5;
      return v;
    });
  };
  const CMatrix a = bs.realize_A().A;
  const CMatrix zero_k = CMatrix::Zero(1, n);
  CHECK(ds_fixed_point_check(a, a, bs.dirichlet(100.0).D, zero_k, forcing(128), 100.0, 2.0, o).residual <= 1e-12);

  const FixedPointCheck c512 = ds_fixed_point_check(a, bs.realize_perturbed().A, bs.dirichlet(100.0).D, bs.k_state(),
                                                    forcing(512), 100.0, 2.0, o);
  const FixedPointCheck c256 = ds_fixed_point_check(a, bs.realize_perturbed().A, bs.dirichlet(100.0).D, bs.k_state(),
                                                    forcing(256), 100.0, 2.0, o);
  CHECK(c512.residual <= 5e-3);
  CHECK(c256.residual / c512.residual >= 1.8);
  CHECK(c512.contraction <= 0.5);
  // The sign pattern (I - F)(R_cl f) = R((I + D K) f + ...) does not hold.
  CHECK(c512.residual_printed > 100.0 * c512.residual);
}
