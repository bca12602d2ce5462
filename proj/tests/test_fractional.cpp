#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "mrlab/fractional.hpp"
#include "mrlab/heat.hpp"

using namespace mrlab;
using namespace testutil;

namespace {

CMatrix shifted_neumann(int N) {
  const BoundarySystem bs = build_heat(N);
  return bs.realize_A().A - CMatrix::Identity(bs.n_state(), bs.n_state());
}

}  // namespace

TEST_CASE("scalar fractional powers") {
  CHECK(std::abs(frac_power_contour(scalar(-4.0), 0.5)(0, 0) - 0.5) < 1e-10);
  for (double beta : {0.1, 0.5, 0.9, 1.0}) CHECK(std::abs(frac_power_contour(scalar(-1.0), beta)(0, 0) - 1.0) < 1e-10);
  CHECK(std::abs(frac_power_eig(scalar(-4.0), -0.5)(0, 0) - 2.0) < 1e-14);
}

TEST_CASE("contour against the eigendecomposition") {
  const CMatrix a = shifted_neumann(32);
  const CMatrix exact = frac_power_eig(a, 0.6);
  const CMatrix contour = frac_power_contour(a, 0.6);
  CHECK(spectral_norm(contour - exact) / spectral_norm(exact) <= 1e-6);
  for (double psi : {0.6 * M_PI, 0.9 * M_PI}) {
    ContourSpec spec;
    spec.psi = psi;
    CHECK(spectral_norm(frac_power_contour(a, 0.6, spec) - contour) / spectral_norm(exact) <= 1e-7);
  }
}

TEST_CASE("J operator") {
  const CMatrix a = shifted_neumann(32);
  const Index n = a.rows();
  CHECK(rel(J_operator(CMatrix::Identity(n, n), a, 0.6), frac_power_contour(a, 0.6)) < 1e-13);
  CHECK(J_operator(CMatrix::Zero(1, n), a, 0.6).norm() == 0.0);
  const CMatrix k = build_heat(32).k_state();
  CHECK(rel(J_operator(k, a, 0.6), k * frac_power_eig(a, 0.6)) <= 1e-8);
  ContourSpec fine;
  fine.n_per_leg *= 2;
  const double j1 = spectral_norm(J_operator(k, a, 0.75)), j2 = spectral_norm(J_operator(k, a, 0.75, fine));
  CHECK(std::isfinite(j1));
  CHECK(std::abs(j1 - j2) / j2 < 0.01);
}

TEST_CASE("contour errors") {
  CHECK_THROWS_AS(frac_power_contour(scalar(2.0), 0.5), LinalgError);  // spectrum inside the sector
  CHECK_THROWS_AS(frac_power_contour(scalar(-1.0), 1.5), LinalgError);
  ContourSpec bad;
  bad.psi = 0.2;
  CHECK_THROWS_AS(bad.validate(), LinalgError);
}

TEST_CASE("resolvent decay fits") {
  const BoundarySystem bs = build_heat(64);
  const CMatrix a = bs.realize_A().A;
  const auto grid = log_grid(1e2, 1e5, 4);
  const DecayFit zero = resolvent_decay_fit(CMatrix::Zero(1, bs.n_state()), a, grid);
  CHECK(zero.degenerate);
  CHECK(resolvent_decay_fit(bs.k_state(), a, grid).slope <= -0.4);
  const DecayFit full = resolvent_decay_fit(CMatrix::Identity(bs.n_state(), bs.n_state()), a, log_grid(1e6, 1e8, 4));
  CHECK(std::abs(full.slope + 1.0) < 0.05);
}

TEST_CASE("small perturbation bound") {
  const CMatrix a = shifted_neumann(32);
  const Index n = a.rows();
  CHECK(small_perturbation_bound(CMatrix::Zero(n, n), a, 0.75).c == 0.0);
  CHECK(std::abs(small_perturbation_bound(frac_power_eig(a, -0.75), a, 0.75).c - 1.0) <= 1e-6);
  const PerturbationBound row = small_perturbation_bound(build_heat(32).k_state(), a, 0.75);
  CHECK(std::isfinite(row.c));
  CHECK(row.holds);
}

TEST_CASE("contour sample dump") {
  const auto path = (std::filesystem::temp_directory_path() / "mrlab_contour.csv").string();
  dump_contour_samples(shifted_neumann(8), 0.5, {}, path);
  CHECK(std::filesystem::file_size(path) > 100);
}
