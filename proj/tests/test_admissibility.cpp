#include <doctest.h>

#include "helpers.hpp"
#include "mrlab/admissibility.hpp"
#include "mrlab/heat.hpp"

using namespace mrlab;
using namespace testutil;

namespace {

const Generator kDecay = Generator::make(scalar(-1.0));

// kappa for p = 2 from a graded Gauss rule applied to the Gramian integrand.
double graded_kappa(const CMatrix& c, const CMatrix& a, double alpha) {
  std::vector<double> t, w;
  double lo = 0.0;
  const int panels = 60;
  for (int k = 0; k < panels; ++k) {
    const double hi = alpha * std::ldexp(1.0, k - panels + 1);
    std::vector<double> tk, wk;
    composite_gauss(lo, hi, 1, 16, tk, wk);
    t.insert(t.end(), tk.begin(), tk.end());
    w.insert(w.end(), wk.begin(), wk.end());
    lo = hi;
  }
  CMatrix g = CMatrix::Zero(a.rows(), a.cols());
  for (size_t i = 0; i < t.size(); ++i) {
    const CMatrix ce = c * expm(a, t[i]);
    g += w[i] * ce.adjoint() * ce;
  }
  return std::sqrt(Eigen::SelfAdjointEigenSolver<CMatrix>(g, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff());
}

}  // namespace

TEST_CASE("observation admissibility") {
  CHECK(obs_admissibility(scalar(0.0), kDecay, 1.0, 2.0).kappa == 0.0);
  CHECK(std::abs(obs_admissibility(scalar(1.0), kDecay, 20.0, 2.0).kappa - 0.70710678118654752) < 1e-9);
  CHECK(std::abs(obs_admissibility(scalar(1.0), kDecay, 1.0, 2.0).kappa - std::sqrt((1.0 - std::exp(-2.0)) / 2.0)) < 1e-12);
  // p = 3 scalar: (\int_0^1 e^{-3t} dt)^{1/3}, right-endpoint rule is first order.
  const double exact3 = std::cbrt((1.0 - std::exp(-3.0)) / 3.0);
  CHECK(std::abs(obs_admissibility(scalar(1.0), kDecay, 1.0, 3.0, 4096).kappa - exact3) / exact3 < 1e-3);

  const BoundarySystem heat = build_heat(64);
  const Generator a = heat.realize_A();
  const double k = obs_admissibility(heat.k_state(), a, 1.0, 2.0).kappa;
  CHECK(std::abs(k - graded_kappa(heat.k_state(), a.A, 1.0)) / k < 0.05);
}

TEST_CASE("control admissibility") {
  const BoundarySystem heat = build_heat(64);
  const Generator a = heat.realize_A();
  CHECK(ctrl_admissibility(CMatrix::Zero(heat.n_state(), 1), a, 1.0, 2.0).kappa == 0.0);
  const CMatrix b = heat.control_vector(1.0).B;
  const double k1 = ctrl_admissibility(b, a, 1.0, 2.0, 256).kappa;
  const double kh = ctrl_admissibility(b, a, 0.5, 2.0, 128).kappa;
  const double kf = ctrl_admissibility(b, a, 1.0, 2.0, 1024).kappa;
  CHECK(kh <= k1);
  CHECK(std::abs(k1 - kf) / kf < 0.05);
  // Scalar: |Phi| = (\int_0^1 e^{-2t} dt)^{1/2} for piecewise-constant inputs in the limit.
  const double exact = std::sqrt((1.0 - std::exp(-2.0)) / 2.0);
  CHECK(std::abs(ctrl_admissibility(scalar(1.0), kDecay, 1.0, 2.0, 2048).kappa - exact) / exact < 1e-3);
}

TEST_CASE("input-output operator") {
  const TimeGrid g = TimeGrid::make(1.0, 64);
  CHECK(io_operator(scalar(-1.0), scalar(0.0), scalar(1.0), g, 2.0).theta == 0.0);
  CHECK(io_operator(scalar(-1.0), scalar(1.0), scalar(0.0), g, 2.0).blocks.norm() == 0.0);
  // Scalar convolution with kernel e^{-t} on L^2(0,1): fine-grid oracle.
  const double coarse = io_operator(scalar(-1.0), scalar(1.0), scalar(1.0), TimeGrid::make(1.0, 128), 2.0).theta;
  const double fine = io_operator(scalar(-1.0), scalar(1.0), scalar(1.0), TimeGrid::make(1.0, 1280), 2.0).theta;
  CHECK(std::abs(coarse - fine) / fine < 0.02);

  const BoundarySystem heat = build_heat(64);
  const CMatrix a = heat.realize_A().A, b = heat.control_vector(1.0).B, k = heat.k_state();
  double prev = INFINITY;
  for (double alpha : {1.0, 0.5, 0.25, 0.125}) {
    const double th = io_operator(a, b, k, TimeGrid::make(alpha, 128), 2.0).theta;
    CHECK(std::isfinite(th));
    CHECK(th < prev);
    prev = th;
  }
  const IOOperatorMatrix f = io_operator(a, b, k, TimeGrid::make(1.0, 64), 2.0);
  const IOOperatorMatrix half = f.truncated(32);
  CHECK(half.grid.n == 32);
  CHECK(std::abs(half.grid.T - 0.5) < 1e-15);
}

TEST_CASE("feedback admissibility") {
  const FeedbackReport zero = feedback_admissible(CMatrix::Zero(8, 8));
  CHECK(zero.invertible);
  CHECK(std::abs(zero.margin - 1.0) < 1e-14);
  const FeedbackReport id = feedback_admissible(CMatrix::Identity(8, 8));
  CHECK_FALSE(id.invertible);
  CHECK(id.margin == 0.0);

  const BoundarySystem heat = build_heat(64);
  const CMatrix a = heat.realize_A().A, b = heat.control_vector(1.0).B, k = heat.k_state();
  const FeedbackReport r1 = feedback_admissible(io_operator(a, b, k, TimeGrid::make(1.0, 256), 2.0));
  const FeedbackReport r2 = feedback_admissible(io_operator(a, b, k, TimeGrid::make(1.0, 512), 2.0));
  CHECK(r1.invertible);
  CHECK(std::abs(r1.margin - r2.margin) / r2.margin < 0.05);
}

TEST_CASE("regularity check") {
  const TimeGrid g = TimeGrid::make(1.0, 256);
  const IOOperatorMatrix zero = io_operator(scalar(-1.0), scalar(0.0), scalar(1.0), g, 2.0);
  const RegularityReport rz = regularity_check(zero, CVector::Ones(1));
  for (double v : rz.values) CHECK(v == 0.0);
  CHECK(rz.verdict == "regular-looking");

  const BoundarySystem heat = build_heat(64);
  const IOOperatorMatrix f = io_operator(heat.realize_A().A, heat.control_vector(1.0).B, heat.k_state(), g, 2.0);
  const RegularityReport r = regularity_check(f, CVector::Ones(1));
  for (size_t i = 1; i < r.values.size(); ++i) CHECK(r.values[i] < r.values[i - 1]);
  CHECK(r.verdict == "regular-looking");

  const CMatrix feed = CMatrix::Identity(1, 1);
  const RegularityReport rn = regularity_check(f, CVector::Ones(1), &feed);
  CHECK(rn.verdict == "not regular-looking");
  CHECK(std::abs(rn.values.back() - 1.0) < 0.2);  // plateau at |z0|
  CHECK_THROWS_AS(regularity_check(f, CVector::Ones(2)), LinalgError);
}

TEST_CASE("Yosida extension of the observation") {
  const BoundarySystem heat = build_heat(64);
  const Generator a = heat.realize_A();
  const YosidaExtensionReport z = yosida_extension(heat.k_state(), a, CVector::Zero(heat.n_state()), log_grid(1e6, 1e9, 4));
  CHECK(z.limit.norm() == 0.0);
  const auto s = heat_nodes(heat);
  CVector x(heat.n_state());
  for (Index i = 0; i < x.size(); ++i) x(i) = std::cos(M_PI * s[static_cast<size_t>(i)]);
  const YosidaExtensionReport r = yosida_extension(heat.k_state(), a, x, log_grid(1e6, 1e9, 4));
  CHECK(r.error <= 1e-8);
  CHECK(std::abs(r.slope + 1.0) <= 0.1);
  CHECK_THROWS_AS(yosida_extension(heat.k_state(), a, x, {10.0}), LinalgError);
}
