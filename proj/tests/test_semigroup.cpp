#include <doctest.h>

#include "helpers.hpp"
#include "mrlab/heat.hpp"
#include "mrlab/semigroup.hpp"

using namespace mrlab;
using namespace testutil;

TEST_CASE("analyticity scan of a scalar generator") {
  const Generator g = Generator::make(scalar(-1.0));
  std::vector<cplx> grid;
  for (double x : log_grid(0.1, 100.0, 20)) grid.emplace_back(x, 0.0);
  const ScanReport r = analyticity_scan(g, 0.0, grid);
  CHECK(r.sup < 1.0);
  CHECK(r.sup > 0.99);
  CHECK(r.verdict == "bounded");
  CHECK_THROWS_AS(analyticity_scan(g, -2.0, grid), LinalgError);
}

TEST_CASE("analyticity scan of the Neumann Laplacian is grid stable") {
  const Generator g = build_heat(64).realize_A();
  const double s1 = analyticity_scan(g, 1.0, halfplane_grid(1.0, 1e-2, 1e4, 20, 5)).sup;
  const double s2 = analyticity_scan(g, 1.0, halfplane_grid(1.0, 1e-2, 1e4, 40, 5)).sup;
  CHECK(std::abs(s1 - s2) / s2 < 0.02);
}

TEST_CASE("weis scan closed form and negative control") {
  const ScanReport r = weis_scan(Generator::make(scalar(-1.0)), default_scan_grid());
  for (size_t i = 0; i < r.grid.size(); ++i) {
    const double s = std::abs(r.grid[i].imag());
    CHECK(std::abs(r.values[i] - s / std::sqrt(1.0 + s * s)) < 1e-12);
  }
  CHECK(r.sup < 1.0);
  CHECK(r.sup > 0.9999);

  std::vector<double> sups;
  for (double eps : {1.0, 1e-1, 1e-2, 1e-3}) {
    CMatrix rot(2, 2);
    rot << -eps, 1.0, -1.0, -eps;
    sups.push_back(weis_scan(Generator::make(rot), default_scan_grid()).sup);
  }
  CHECK(family_verdict(sups) == "unbounded-looking");
  CHECK(sups.back() > 100.0 * sups.front());
}

TEST_CASE("weis scan of the shifted Neumann Laplacian is grid stable") {
  const BoundarySystem bs = build_heat(64);
  const Generator g = Generator::make(bs.realize_A().A - CMatrix::Identity(bs.n_state(), bs.n_state()));
  const double s1 = weis_scan(g, default_scan_grid(60)).sup, s2 = weis_scan(g, default_scan_grid(120)).sup;
  CHECK(std::isfinite(s1));
  CHECK(std::abs(s1 - s2) / s2 < 0.02);
}

TEST_CASE("fractional scans") {
  const Generator g = Generator::make(scalar(-1.0));
  const auto [rb, rc] = fractional_scans(g, scalar(1.0), scalar(0.0), 1.0, 0.5, 0.5, default_scan_grid());
  CHECK(rc.sup == 0.0);
  for (size_t i = 0; i < rb.grid.size(); ++i) {
    const double s = std::abs(rb.grid[i].imag());
    const double exact = std::sqrt(s) / std::abs(cplx(2.0, s));
    CHECK(std::abs(rb.values[i] - exact) < 1e-8);
  }
  const BoundarySystem bs = build_heat(64);
  const Generator a0 = bs.realize_A();
  const auto f1 = fractional_scans(a0, bs.control_vector(1.0).B, bs.k_state(), 1.0, 0.5, 0.5, default_scan_grid(60));
  const auto f2 = fractional_scans(a0, bs.control_vector(1.0).B, bs.k_state(), 1.0, 0.5, 0.5, default_scan_grid(120));
  CHECK(std::abs(f1.second.sup - f2.second.sup) / f2.second.sup < 0.02);
  CHECK(std::abs(f1.first.sup - f2.first.sup) / f2.first.sup < 0.02);
}

TEST_CASE("yosida approximation") {
  CHECK(std::abs(yosida_approx(Generator::make(scalar(-1.0)), 9.0)(0, 0) - (-0.9)) < 1e-15);
  CHECK(yosida_approx(Generator::make(CMatrix::Zero(3, 3)), 50.0).norm() == 0.0);
  const BoundarySystem bs = build_heat(32);
  const Generator a = bs.realize_A();
  const auto s = heat_nodes(bs);
  CVector x(bs.n_state());
  for (Index i = 0; i < x.size(); ++i) x(i) = std::cos(M_PI * s[static_cast<size_t>(i)]);
  const CVector ax = a.A * x;
  const double e2 = (yosida_approx(a, 1e2) * x - ax).norm(), e3 = (yosida_approx(a, 1e3) * x - ax).norm();
  CHECK(e2 / e3 >= 5.0);
}

TEST_CASE("yosida split") {
  const BoundarySystem heat = build_heat(64);
  CHECK(yosida_split_check(heat.with_k(CMatrix::Zero(1, heat.n_ext())), 50.0) <= 1e-12);
  for (double n : {20.0, 50.0, 100.0, 500.0}) CHECK(yosida_split_check(heat, n) <= 1e-9);
}

TEST_CASE("scan verdict heuristics") {
  CHECK(family_verdict({1.0, 2.0, 5.0}) == "bounded");
  CHECK(family_verdict({1.0, 20.0}) == "unbounded-looking");
  CHECK_THROWS_AS(weis_scan(Generator::make(scalar(-1.0)), {-1.0}), LinalgError);
}
