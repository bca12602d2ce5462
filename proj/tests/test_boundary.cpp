#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "mrlab/boundary.hpp"
#include "mrlab/heat.hpp"

using namespace mrlab;
using namespace testutil;

namespace {

BoundarySystem no_k(const BoundarySystem& bs) { return bs.with_k(CMatrix::Zero(bs.m(), bs.n_ext())); }

std::vector<double> sorted_real(const CMatrix& a) {
  const CVector v = eig(a).values;
  std::vector<double> r;
  for (Index i = 0; i < v.size(); ++i) r.push_back(v(i).real());
  std::sort(r.begin(), r.end(), std::greater<>());
  return r;
}

}  // namespace

TEST_CASE("free realization is the Neumann second difference") {
  const int N = 16;
  const BoundarySystem bs = build_heat(N);
  const CMatrix a = bs.realize_A().A;
  const double h2 = 1.0 / (N * N);
  for (Index i = 1; i < N; ++i) {
    CHECK(std::abs(a(i, i) * h2 + 2.0) < 1e-12);
    CHECK(std::abs(a(i, i - 1) * h2 - 1.0) < 1e-12);
    CHECK(std::abs(a(i, i + 1) * h2 - 1.0) < 1e-12);
    CHECK(std::abs(a.row(i).sum()) < 1e-9);
  }
  // Ghost elimination with the centred Neumann condition doubles the inner neighbour.
  CHECK(std::abs(a(0, 1) * h2 - 2.0) < 1e-12);
  CHECK(std::abs(a(N, N - 1) * h2 - 2.0) < 1e-12);
  const auto ev = sorted_real(build_heat(200).realize_A().A);
  CHECK(std::abs(ev[0]) < 1e-8);
  CHECK(std::abs(ev[1] + M_PI * M_PI) < 1e-3);
}

TEST_CASE("one-node toy reduces to the interior stencil") {
  BoundaryDescription d;
  d.am = CMatrix::Zero(1, 3);
  d.am << 1.0, -2.0, 1.0;
  d.g = CMatrix::Zero(2, 3);
  d.g(0, 0) = 1.0;  // ghost values pinned to zero
  d.g(1, 2) = 1.0;
  d.k = CMatrix::Zero(2, 3);
  d.z_constraints = CMatrix::Zero(0, 3);
  d.state_index = {1};
  d.weights = {1.0};
  const BoundarySystem bs(d);
  CHECK(std::abs(bs.realize_A().A(0, 0) + 2.0) < 1e-14);
}

TEST_CASE("perturbed realization") {
  const BoundarySystem heat = build_heat(32);
  CHECK(rel(no_k(heat).realize_perturbed().A, heat.realize_A().A) == 0.0);
  const CMatrix diff = heat.realize_perturbed().A - heat.realize_A().A;
  // Only rows next to s = 1 (where the ghost value enters) change.
  for (Index i = 0; i < heat.n_state() - 1; ++i) CHECK(diff.row(i).norm() == 0.0);
  CHECK(diff.row(heat.n_state() - 1).norm() > 0.0);
  // Spectrum stable under refinement: O(N^-2) drift of the leading modes.
  const auto e64 = sorted_real(build_heat(64).realize_perturbed().A);
  const auto e128 = sorted_real(build_heat(128).realize_perturbed().A);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(e64[k] - e128[k]) <= 1e-2 * std::max(1.0, std::abs(e128[k])));
}

TEST_CASE("Dirichlet operator against the analytic profile") {
  for (double l : {1.0, 4.0}) {
    const BoundarySystem bs = build_heat(256);
    const DirichletOp d = bs.dirichlet(l);
    const double exact_end = std::cosh(std::sqrt(l)) / (std::sqrt(l) * std::sinh(std::sqrt(l)));
    CHECK(std::abs(d.D(bs.n_state() - 1, 0).real() - exact_end) / exact_end < 1e-4);
    CHECK(d.constraint_residual < 1e-10);
    CHECK(d.interior_residual < 1e-10);
  }
  CHECK(std::abs(std::cosh(1.0) / std::sinh(1.0) - 1.3130352855) < 1e-10);
  // Complex lambda: the boundary condition G d = 1 and the interior equation hold.
  const DirichletOp dc = build_heat(64).dirichlet(cplx(3.0, 2.0));
  CHECK(dc.constraint_residual < 1e-10);
  CHECK(dc.interior_residual < 1e-10);
  CHECK(std::abs(dc.D.imag().norm()) > 0.0);
}

TEST_CASE("control matrix") {
  const BoundarySystem heat = build_heat(64);
  const ControlVector cv = heat.control_vector(2.0);
  CHECK(cv.consistency_residual <= 1e-9);
  const double top = cv.B.cwiseAbs().maxCoeff();
  for (Index i = 0; i < heat.n_state() - 3; ++i) CHECK(std::abs(cv.B(i, 0)) <= 1e-8 * top);
  const BoundarySystem free = no_k(heat);
  CHECK(rel(free.realize_A().A + free.control_vector(2.0).B * free.k_state(), free.realize_A().A) == 0.0);
}

TEST_CASE("resolvent identities") {
  const BoundarySystem heat = build_heat(64);
  for (cplx l : {cplx(5.0, 0.0), cplx(10.0, 3.0), cplx(1.0, 1.0)}) {
    const ResolventIdentityReport r = resolvent_identity_check(heat, l);
    CHECK(r.thm32_iv <= 1e-10);
    CHECK(r.generator_eq <= 1e-10);
    CHECK_FALSE(r.feedback_obstruction);
    const ResolventIdentityReport r0 = resolvent_identity_check(no_k(heat), l);
    CHECK(r0.thm32_iv <= 1e-12);
    CHECK(r0.generator_eq <= 1e-12);
  }
  CHECK(generator_lambda_independence(heat, 5.0, 20.0) <= 1e-10);
}

TEST_CASE("singularity of I - K D_l tracks the spectrum of the perturbed generator") {
  const BoundarySystem heat = build_heat(32);
  std::vector<cplx> grid;
  for (double x : log_grid(0.05, 50.0, 8)) grid.emplace_back(-x, 0.3);
  CHECK(singularity_detector_correlation(heat, grid) > 0.5);
}

TEST_CASE("invalid descriptions are rejected") {
  BoundaryDescription d;
  d.am = CMatrix::Zero(2, 4);
  d.g = CMatrix::Zero(1, 3);
  d.k = CMatrix::Zero(1, 4);
  d.z_constraints = CMatrix::Zero(0, 4);
  d.state_index = {1, 2};
  CHECK_THROWS_AS(BoundarySystem{d}, LinalgError);
}
