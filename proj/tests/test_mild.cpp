#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "mrlab/heat.hpp"
#include "mrlab/mild.hpp"

using namespace mrlab;
using namespace testutil;

namespace {

BochnerSignal constant(const TimeGrid& g, const CVector& v) {
  return BochnerSignal::sample(g, v.size(), [&](double) { return v; });
}

CVector cos_profile(const BoundarySystem& bs) {
  const auto s = heat_nodes(bs);
  CVector x(bs.n_state());
  for (Index i = 0; i < x.size(); ++i) x(i) = std::cos(M_PI * s[static_cast<size_t>(i)]) + 0.5 * s[static_cast<size_t>(i)];
  return x;
}

}  // namespace

TEST_CASE("time grid and signal basics") {
  CHECK_THROWS_AS(TimeGrid::make(0.0, 4), LinalgError);
  CHECK_THROWS_AS(TimeGrid::make(1.0, 0), LinalgError);
  const TimeGrid g = TimeGrid::make(2.0, 8);
  CHECK(g.h() == 0.25);
  const BochnerSignal f = constant(g, CVector::Ones(3));
  CHECK(std::abs(f.lp_norm(2.0, false) - std::sqrt(2.0 * 3.0)) < 1e-14);
  const auto path = (std::filesystem::temp_directory_path() / "mrlab_signal.csv").string();
  f.write_csv(path);
  CHECK(rel(BochnerSignal::read_csv(path).samples, f.samples) == 0.0);
}

TEST_CASE("evolve: zero data and scalar closed form") {
  const TimeGrid g = TimeGrid::make(1.0, 64);
  const Generator a = Generator::make(scalar(-1.0));
  CHECK(evolve(a, CVector::Zero(1), BochnerSignal::zeros(g, 1)).samples.norm() == 0.0);
  const BochnerSignal z = evolve(a, CVector::Zero(1), constant(g, CVector::Ones(1)));
  CHECK(std::abs(z.samples(0, 64).real() - 0.63212055882855767) < 1e-14);
}

TEST_CASE("evolve converges at first order for time-varying forcing") {
  const BoundarySystem bs = build_heat(32);
  const Generator a = bs.realize_perturbed();
  const auto s = heat_nodes(bs);
  auto run = [&](int n) {
    const TimeGrid g = TimeGrid::make(1.0, n);
    return evolve(a, CVector::Zero(bs.n_state()), BochnerSignal::sample(g, bs.n_state(), [&](double t) {
                    CVector v(bs.n_state());
                    for (Index i = 0; i < v.size(); ++i) v(i) = std::sin(M_PI * s[static_cast<size_t>(i)]) * std::exp(-t);
                    return v;
                  }));
  };
  const BochnerSignal ref = run(2560);
  std::vector<double> errs;
  for (int n : {64, 128, 256}) {
    const BochnerSignal z = run(n);
    errs.push_back((z.at(n) - ref.at(2560)).norm() / ref.at(2560).norm());
  }
  CHECK(errs[0] <= 1e-2);
  for (double o : empirical_orders(errs)) CHECK(o >= 0.9);
}

TEST_CASE("closed-loop variation of constants") {
  const BoundarySystem heat = build_heat(64);
  const CVector x0 = cos_profile(heat);
  const BoundarySystem free = heat.with_k(CMatrix::Zero(1, heat.n_ext()));
  const TimeGrid g = TimeGrid::make(0.5, 128);
  const ClosedLoopResidual r0 = closed_loop_vcf_residual(free.realize_A().A, free.control_vector(1.0).B,
                                                         free.k_state(), free.realize_perturbed().A, x0, g);
  CHECK(r0.ws <= 1e-12);
  CHECK(r0.mv_gap <= 1e-12);

  std::vector<double> ws, gap;
  for (int n : {64, 128, 256, 512}) {
    const ClosedLoopResidual r = closed_loop_vcf_residual(heat.realize_A().A, heat.control_vector(1.0).B,
                                                          heat.k_state(), heat.realize_perturbed().A, x0,
                                                          TimeGrid::make(0.5, n));
    ws.push_back(r.ws);
    gap.push_back(r.mv_gap);
  }
  CHECK(ws.back() <= 5e-3);
  CHECK(gap.back() <= 5e-3);
  for (size_t i = 1; i < ws.size(); ++i) {
    CHECK(ws[i - 1] / ws[i] >= 1.8);
    CHECK(gap[i - 1] / gap[i] >= 1.8);
  }
}

TEST_CASE("perturbed variation of constants") {
  const BoundarySystem heat = build_heat(64);
  const Index n = heat.n_state();
  const TimeGrid g = TimeGrid::make(0.5, 512);
  const CMatrix a = heat.realize_A().A, b = heat.control_vector(1.0).B, k = heat.k_state();
  const CMatrix acl = heat.realize_perturbed().A;
  CHECK(perturbed_vcf_residual(a, b, k, acl, CVector::Zero(n), BochnerSignal::zeros(g, n)) == 0.0);
  CHECK(perturbed_vcf_residual(a, b, k, acl, CVector::Zero(n), constant(g, random_vector(n, 5).real().cast<cplx>())) <= 5e-3);
  CHECK(perturbed_vcf_residual(a, b, CMatrix::Zero(1, n), a, CVector::Zero(n), constant(g, random_vector(n, 6))) <= 1e-12);
}

TEST_CASE("Miyadera fixed point") {
  const BoundarySystem heat = build_heat(64);
  const Index n = heat.n_state();
  const TimeGrid g = TimeGrid::make(0.5, 512);
  const CMatrix acl = heat.realize_perturbed().A;
  const CVector x0 = cos_profile(heat);
  const BochnerSignal f = constant(g, CVector::Ones(n));
  CHECK(miyadera_fixed_point(acl, CMatrix::Zero(n, n), x0, f).residual <= 1e-12);
  const FixedPointResult zero = miyadera_fixed_point(acl, CMatrix::Identity(n, n), CVector::Zero(n), BochnerSignal::zeros(g, n));
  CHECK(zero.z.samples.norm() == 0.0);
  const CMatrix p = 0.1 * heat_fractional_F(acl, 1.0 / 3.0, false);
  CHECK(miyadera_fixed_point(acl, p, x0, f).residual <= 5e-3);
}

TEST_CASE("empirical orders") {
  const auto o = empirical_orders({4.0, 2.0, 1.0});
  REQUIRE(o.size() == 2);
  CHECK(std::abs(o[0] - 1.0) < 1e-15);
}
