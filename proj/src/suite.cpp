#include "mrlab/suite.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "mrlab/admissibility.hpp"
#include "mrlab/fractional.hpp"
#include "mrlab/heat.hpp"
#include "mrlab/volterra.hpp"

namespace mrlab {

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

std::string fmt(cplx z) {
  std::ostringstream os;
  os << z.real();
  if (z.imag() != 0.0) os << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  return os.str();
}

std::string out_path(const SuiteConfig& cfg, const std::string& name) {
  if (cfg.out_dir.empty()) return {};
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

bool is_heat(const SuiteConfig& cfg) { return cfg.example == "heat"; }

HeatConfig heat_config(const SuiteConfig& cfg, int N) {
  HeatConfig h;
  h.N = N;
  h.r = cfg.r;
  h.p = cfg.p;
  h.T = cfg.T;
  h.steps = cfg.steps;
  return h;
}

BoundarySystem boundary_for(const SuiteConfig& cfg) {
  if (cfg.example == "heat") return build_heat(heat_config(cfg, cfg.N));
  if (cfg.example == "custom") {
    nlohmann::json j = cfg.custom;
    j["example"] = "custom";
    return boundary_from_json(j);
  }
  throw LinalgError("example '" + cfg.example + "' has no boundary structure; use heat or custom");
}

/// Smooth probe: cos(pi s) + s^2 / 2 on the state nodes (index-based for custom grids).
CVector smooth_probe(Index n) {
  CVector x(n);
  for (Index i = 0; i < n; ++i) {
    const double s = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    x(i) = std::cos(kPi * s) + 0.5 * s * s;
  }
  return x;
}

/// Forcing cos(pi s)(1 + t) + 1/2: smooth in time and space, not an eigenmode.
BochnerSignal smooth_forcing(const TimeGrid& grid, Index n) {
  return BochnerSignal::sample(grid, n, [n](double t) {
    CVector v(n);
    for (Index i = 0; i < n; ++i) {
      const double s = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
      v(i) = std::cos(kPi * s) * (1.0 + t) + 0.5;
    }
    return v;
  });
}

double min_ratio(const std::vector<double>& errs) {
  double r = INFINITY;
  for (size_t i = 1; i < errs.size(); ++i) r = std::min(r, errs[i - 1] / errs[i]);
  return r;
}

json vec_json(const std::vector<double>& v) { return json(v); }

/// Spectral projector onto the null mode, or zero when the matrix is regular.
CMatrix null_projector(const CMatrix& a) {
  try {
    const NullPair np = null_pair(a);
    return np.right * np.left.adjoint();
  } catch (const LinalgError&) {
    return CMatrix::Zero(a.rows(), a.cols());
  }
}

/// eps * (-A)^theta on the complement of the null mode.
CMatrix fractional_perturbation(const CMatrix& a, double theta, double eps) {
  const Index n = a.rows();
  const CMatrix proj = null_projector(a);
  return eps * frac_power_eig(a - proj, -theta) * (CMatrix::Identity(n, n) - proj);
}

/// kappa for p = 2 from the Gramian assembled by graded Gauss quadrature in time.
double graded_gramian_kappa(const CMatrix& c, const CMatrix& a, double alpha, int panels) {
  std::vector<double> t, w;
  double lo = 0.0;
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
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (g + g.adjoint()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Upwind left shift on m cells of [0, 1] with zero inflow: (S - I) m.
Generator transport(int m) {
  CMatrix d = CMatrix::Zero(m, m);
  d.diagonal().setConstant(-static_cast<double>(m));
  d.diagonal(1).setConstant(static_cast<double>(m));
  return Generator::make(d, "transport");
}

/// Centred difference d/ds on m cells: skew, so no numerical damping hides
/// the missing analytic sector.
Generator centred_transport(int m) {
  CMatrix d = CMatrix::Zero(m, m);
  d.diagonal(1).setConstant(0.5 * m);
  d.diagonal(-1).setConstant(-0.5 * m);
  return Generator::make(d, "centred-transport");
}

std::vector<cplx> default_lambdas(const SuiteConfig& cfg) {
  if (!cfg.lambdas.empty()) return cfg.lambdas;
  return {cplx(5.0, 0.0), cplx(1.0, 1.0), cplx(10.0, 3.0)};
}

}  // namespace

void SuiteConfig::validate() const {
  auto fail = [](const std::string& m) { throw LinalgError("config: " + m); };
  if (example != "heat" && example != "scalar" && example != "custom") {
    fail("example must be heat, scalar or custom (got '" + example + "')");
  }
  if (example == "custom" && !custom.is_object()) fail("example custom needs a 'custom' object in the config file");
  if (N < 8) fail("N must be at least 8 (got " + std::to_string(N) + ")");
  if (!(r > 1.0) || !std::isfinite(r)) fail("r must lie in (1, inf)");
  if (!(p > 1.0) || !std::isfinite(p)) fail("p must lie in (1, inf)");
  if (!(T > 0.0) || !std::isfinite(T)) fail("T must be positive");
  if (steps < 16 || steps % 16 != 0) fail("steps must be a positive multiple of 16 (got " + std::to_string(steps) + ")");
  if (!(tol_scale > 0.0)) fail("tol-scale must be positive");
  if (pide_N < 8) fail("pide_N must be at least 8");
  if (favard_N < 8) fail("favard_N must be at least 8");
  if (example == "heat") heat_config(*this, N).validate();
}

SuiteConfig SuiteConfig::from_json(const json& j) {
  if (!j.is_object()) throw LinalgError("config: top level must be an object");
  static const std::set<std::string> known = {"example", "N",      "r",       "p",        "T",
                                              "steps",   "seed",   "tol_scale", "lambda", "pide_N",
                                              "favard_N", "out",   "custom"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw LinalgError("config: unknown key '" + key + "'");
  }
  SuiteConfig c;
  try {
    c.example = j.value("example", c.example);
    c.N = j.value("N", c.N);
    c.r = j.value("r", c.r);
    c.p = j.value("p", c.p);
    c.T = j.value("T", c.T);
    c.steps = j.value("steps", c.steps);
    c.seed = j.value("seed", c.seed);
    c.tol_scale = j.value("tol_scale", c.tol_scale);
    c.pide_N = j.value("pide_N", c.pide_N);
    c.favard_N = j.value("favard_N", c.favard_N);
    c.out_dir = j.value("out", c.out_dir);
    if (j.contains("lambda")) {
      for (const auto& v : j.at("lambda")) {
        if (v.is_number()) c.lambdas.emplace_back(v.get<double>(), 0.0);
        else c.lambdas.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      }
    }
    if (j.contains("custom")) c.custom = j.at("custom");
  } catch (const json::exception& e) {
    throw LinalgError(std::string("config: ") + e.what());
  }
  return c;
}

DsChoice heat_ds_choice(int N, const TimeGrid& grid, double p, const std::vector<double>& mu_grid) {
  const BoundarySystem base = build_heat(N);
  CMatrix avg = CMatrix::Zero(1, base.n_ext());
  for (Index i = 0; i < base.n_state(); ++i) {
    avg(0, base.state_index()[static_cast<size_t>(i)]) = base.weights()[static_cast<size_t>(i)];
  }
  const BoundarySystem bs = base.with_k(avg);
  MaxRegOptions opts;
  opts.spatial_weights = bs.weights();
  const CMatrix a = bs.realize_A().A;
  DsChoice out;
  out.mu_grid = mu_grid;
  for (double mu : mu_grid) {
    const CMatrix d = bs.dirichlet(mu).D;
    const double c = feedback_contraction(a, d, bs.k_state(), grid, p, opts);
    out.contractions.push_back(c);
    if (c <= 0.5) {
      const BochnerSignal f = smooth_forcing(grid, bs.n_state());
      out.check = ds_fixed_point_check(a, bs.realize_perturbed().A, d, bs.k_state(), f, mu, p, opts);
      return out;
    }
  }
  throw LinalgError("mu too small for contraction: no grid value gives |F^mu| <= 1/2");
}

Report check_identities(const SuiteConfig& cfg) {
  Report rep(cfg.tol_scale);
  const BoundarySystem bs = boundary_for(cfg);
  const std::vector<cplx> lambdas = default_lambdas(cfg);
  for (cplx l : lambdas) {
    const ResolventIdentityReport r = resolvent_identity_check(bs, l);
    const json meta = {{"lambda", fmt(l)}, {"sv_perturbed", r.sv_perturbed}, {"sv_feedback", r.sv_feedback}};
    rep.at_most("resolvent_identity[" + fmt(l) + "]", r.thm32_iv, 1e-10, meta);
    rep.at_most("generator_equality[" + fmt(l) + "]", r.generator_eq, 1e-10, meta);
  }
  const cplx l1 = lambdas.front(), l2 = lambdas.size() > 1 ? lambdas[1] : lambdas.front() + 7.0;
  rep.at_most("generator_lambda_independence", generator_lambda_independence(bs, l1, l2), 1e-10,
              {{"lambda1", fmt(l1)}, {"lambda2", fmt(l2)}});
  rep.at_most("control_vector_consistency", bs.control_vector(l1).consistency_residual, 1e-8);

  std::vector<std::vector<double>> rows;
  for (double n : {20.0, 50.0, 100.0, 500.0}) {
    const double res = yosida_split_check(bs, n);
    rows.push_back({n, res});
    rep.at_most("yosida_split[n=" + std::to_string(static_cast<int>(n)) + "]", res, 1e-9);
  }
  if (auto path = out_path(cfg, "yosida_split.csv"); !path.empty()) write_csv(path, {"n", "residual"}, rows);

  // Probes in D(A_pert^2): x = R(mu, A_pert)^2 v for smooth v.
  const Generator ap = bs.realize_perturbed();
  const Index n = bs.n_state();
  const double mu0 = std::max(1.0, ap.omega0 + 1.0);
  const CMatrix r0 = resolvent(ap.A, mu0);
  std::vector<double> errs;
  const CVector x = r0 * (r0 * smooth_probe(n));
  for (double m : {10.0, 100.0, 1000.0, 10000.0}) {
    if (!(m > ap.omega0)) continue;
    errs.push_back((yosida_approx(ap, m) * x - ap.A * x).norm() / (ap.A * x).norm());
  }
  rep.at_least("yosida_approx_decay_per_decade", min_ratio(errs), 5.0, {{"errors", vec_json(errs)}});

  const Generator a = bs.realize_A();
  const CMatrix b = bs.control_vector(l1).B;
  const CMatrix k = bs.k_state();
  const CVector x0 = smooth_probe(n);
  std::vector<double> ws, gap, pert;
  std::vector<std::vector<double>> vcf_rows;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> nd;
  CVector field(n);
  for (Index i = 0; i < n; ++i) field(i) = nd(rng);
  for (int level = 3; level >= 0; --level) {
    const TimeGrid grid = TimeGrid::make(0.5, cfg.steps >> level);
    const ClosedLoopResidual r = closed_loop_vcf_residual(a.A, b, k, ap.A, x0, grid);
    const BochnerSignal f = BochnerSignal::sample(grid, n, [&](double) { return field; });
    const double pr = perturbed_vcf_residual(a.A, b, k, ap.A, CVector::Zero(n), f);
    ws.push_back(r.ws);
    gap.push_back(r.mv_gap);
    pert.push_back(pr);
    vcf_rows.push_back({static_cast<double>(grid.n), r.ws, r.mv1, r.mv2, r.mv_gap, pr});
  }
  if (auto path = out_path(cfg, "vcf_residuals.csv"); !path.empty()) {
    write_csv(path, {"n", "ws", "mv1", "mv2", "mv_gap", "perturbed"}, vcf_rows);
  }
  const json vcf_meta = {{"T", 0.5}, {"n", cfg.steps}, {"residuals", vec_json(ws)}};
  rep.at_most("closed_loop_vcf", ws.back(), 5e-3, vcf_meta);
  rep.at_least("closed_loop_vcf_halving_ratio", min_ratio(ws), 1.8, vcf_meta);
  rep.at_most("miyadera_orderings_gap", gap.back(), 5e-3, {{"gaps", vec_json(gap)}});
  rep.at_least("miyadera_orderings_halving_ratio", min_ratio(gap), 1.8, {{"gaps", vec_json(gap)}});
  rep.at_most("perturbed_vcf", pert.back(), 5e-3, {{"residuals", vec_json(pert)}});
  rep.at_least("perturbed_vcf_halving_ratio", min_ratio(pert), 1.8, {{"residuals", vec_json(pert)}});

  if (is_heat(cfg)) {
    const CMatrix p = fractional_perturbation(ap.A, 1.0 / 3.0, 0.1);
    const TimeGrid grid = TimeGrid::make(0.5, cfg.steps);
    const FixedPointResult fp = miyadera_fixed_point(ap.A, p, x0, smooth_forcing(grid, n));
    rep.at_most("miyadera_fixed_point", fp.residual, 5e-3, {{"eps", 0.1}, {"theta", 1.0 / 3.0}});
  }
  return rep;
}

Report check_admissibility(const SuiteConfig& cfg) {
  Report rep(cfg.tol_scale);
  if (cfg.example == "scalar") {
    const Generator a = Generator::make(CMatrix::Constant(1, 1, -1.0), "scalar");
    const CMatrix one = CMatrix::Ones(1, 1);
    const AdmissibilityReport obs = obs_admissibility(one, a, 20.0, 2.0);
    rep.at_most("obs_kappa_scalar", std::abs(obs.kappa - 1.0 / std::sqrt(2.0)), 1e-6, {{"kappa", obs.kappa}});
    const IOOperatorMatrix f = io_operator(a.A, one, one, TimeGrid::make(1.0, cfg.steps), 2.0);
    const FeedbackReport fb = feedback_admissible(f);
    rep.at_least("feedback_margin", fb.margin, 1e-8, {{"margin_half", fb.margin_half}});
    const YosidaExtensionReport ye = yosida_extension(one, a, one.col(0), log_grid(1e3, 1e6, 4));
    rep.at_most("yosida_extension", ye.error, 1e-8, {{"slope", ye.slope}});
    rep.at_most("yosida_extension_slope", std::abs(ye.slope + 1.0), 0.1, {{"slope", ye.slope}});
    return rep;
  }
  const BoundarySystem bs = boundary_for(cfg);
  const Generator a = bs.realize_A();
  const CMatrix b = bs.control_vector(1.0).B;
  const CMatrix k = bs.k_state();
  const double p = cfg.p;

  const AdmissibilityReport obs = obs_admissibility(k, a, 1.0, p, cfg.steps);
  const double obs_ref = p == 2.0 ? graded_gramian_kappa(k, a.A, 1.0, 4 * 20)
                                  : obs_admissibility(k, a, 1.0, p, 4 * cfg.steps).kappa;
  rep.at_most("obs_kappa_refinement", std::abs(obs.kappa - obs_ref) / obs_ref, 0.05,
              {{"kappa", obs.kappa}, {"reference", obs_ref}, {"method", obs.method}});

  const AdmissibilityReport ctrl = ctrl_admissibility(b, a, 1.0, p, cfg.steps);
  const AdmissibilityReport ctrl_fine = ctrl_admissibility(b, a, 1.0, p, 4 * cfg.steps);
  rep.at_most("ctrl_kappa_refinement", std::abs(ctrl.kappa - ctrl_fine.kappa) / ctrl_fine.kappa, 0.05,
              {{"kappa", ctrl.kappa}, {"reference", ctrl_fine.kappa}});
  const AdmissibilityReport ctrl_half = ctrl_admissibility(b, a, 0.5, p, cfg.steps / 2);
  rep.flag("ctrl_kappa_monotone", ctrl_half.kappa <= ctrl.kappa * (1.0 + 1e-12),
           {{"t0_half", ctrl_half.kappa}, {"t0", ctrl.kappa}});

  const IOOperatorMatrix f = io_operator(a.A, b, k, TimeGrid::make(1.0, cfg.steps), p);
  const IOOperatorMatrix f2 = io_operator(a.A, b, k, TimeGrid::make(1.0, 2 * cfg.steps), p);
  const FeedbackReport fb = feedback_admissible(f), fb2 = feedback_admissible(f2);
  const json fb_meta = {{"margin", fb.margin}, {"margin_refined", fb2.margin}, {"margin_half", fb.margin_half}};
  rep.at_least("feedback_margin", fb.margin, 1e-8, fb_meta);
  rep.at_most("feedback_margin_refinement", std::abs(fb.margin - fb2.margin) / fb2.margin, 0.05, fb_meta);
  const Index m = f.in_dim;
  const FeedbackReport identity = feedback_admissible(CMatrix::Identity(f.grid.n * m, f.grid.n * m));
  rep.flag("identity_loop_not_invertible", !identity.invertible, {{"margin", identity.margin}});

  const CVector z0 = CVector::Ones(m);
  const RegularityReport reg = regularity_check(f, z0);
  rep.flag("regular_looking", reg.verdict == "regular-looking",
           {{"values", vec_json(reg.values)}, {"tail_slope", reg.tail_slope}});
  const CMatrix feed = CMatrix::Identity(f.out_dim, m);
  const RegularityReport reg_neg = regularity_check(f, z0, &feed);
  rep.flag("feedthrough_not_regular", reg_neg.verdict == "not regular-looking",
           {{"values", vec_json(reg_neg.values)}, {"tail_slope", reg_neg.tail_slope}});
  if (auto path = out_path(cfg, "regularity.csv"); !path.empty()) {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < reg.tau.size(); ++i) rows.push_back({reg.tau[i], reg.values[i], reg_neg.values[i]});
    write_csv(path, {"tau", "value", "value_feedthrough"}, rows);
  }

  std::vector<double> thetas;
  for (double alpha : {1.0, 0.5, 0.25, 0.125}) {
    thetas.push_back(io_operator(a.A, b, k, TimeGrid::make(alpha, cfg.steps / 2), p).theta);
  }
  bool decreasing = true;
  for (size_t i = 1; i < thetas.size(); ++i) decreasing = decreasing && thetas[i] < thetas[i - 1];
  rep.flag("io_norm_decreases_with_horizon", decreasing, {{"alpha", {1.0, 0.5, 0.25, 0.125}}, {"theta", thetas}});

  const CVector x = smooth_probe(bs.n_state());
  const YosidaExtensionReport ye = yosida_extension(k, a, x, log_grid(1e6, 1e9, 4));
  rep.at_most("yosida_extension", ye.error, 1e-8, {{"slope", ye.slope}});
  rep.at_most("yosida_extension_slope", std::abs(ye.slope + 1.0), 0.1, {{"slope", ye.slope}});
  return rep;
}

Report check_maxreg(const SuiteConfig& cfg) {
  Report rep(cfg.tol_scale);
  const double p = cfg.p;
  if (cfg.example == "scalar") {
    const Generator a = Generator::make(CMatrix::Constant(1, 1, -1.0), "scalar");
    const RefinementStudy st = refinement_study(a, TimeGrid::make(cfg.T, cfg.steps), p);
    rep.at_most("scalar_C_est_refinement", st.variation, 0.05, {{"C_est", st.levels.front().C_est}});
    return rep;
  }
  const BoundarySystem bs = boundary_for(cfg);
  MaxRegOptions opts;
  opts.spatial_weights = bs.weights();
  const TimeGrid grid = TimeGrid::make(cfg.T, cfg.steps / 2);
  const Generator ap = bs.realize_perturbed();
  const BochnerSignal witness = smooth_forcing(grid, bs.n_state());
  const MaxRegReport r = maxreg_constant(ap, grid, p, &witness, opts);
  const double witness_ratio = (r.norm_dz + r.norm_z + r.norm_Gz) / r.norm_f;
  rep.flag("witness_below_C_est", r.C_est >= witness_ratio,
           {{"C_est", r.C_est}, {"witness_ratio", witness_ratio}});
  rep.flag("maxreg_converged", r.converged, {{"method", r.method}});

  // Negative control: the shift germ is not analytic, so |R| keeps growing.
  std::vector<double> shift_norms;
  for (int m : {16, 64, 256}) shift_norms.push_back(maxreg_constant(transport(m), TimeGrid::make(1.0, m), p).norm_R);
  rep.at_least("shift_control_growth", shift_norms.back() / shift_norms.front(), 1.5,
               {{"norm_R", vec_json(shift_norms)}, {"cells", {16, 64, 256}}});

  if (is_heat(cfg)) {
    const BoundarySystem coarse = build_heat(cfg.N / 2);
    MaxRegOptions copts;
    copts.spatial_weights = coarse.weights();
    const MaxRegReport rc = maxreg_constant(coarse.realize_perturbed(), grid, p, nullptr, copts);
    rep.at_most("C_est_N_family", std::abs(r.C_est - rc.C_est) / rc.C_est, 0.10,
                {{"C_est_N", r.C_est}, {"C_est_N_half", rc.C_est}});

    const CMatrix a0 = bs.realize_A().A;
    const CMatrix pert = fractional_perturbation(a0, 1.0 / 3.0, 0.1);
    const std::vector<std::pair<std::string, Generator>> gens = {
        {"A", bs.realize_A()},
        {"A+P", Generator::make(a0 + pert, "A+P")},
        {"A_pert", ap},
        {"A_pert+P", Generator::make(ap.A + pert, "A_pert+P")}};
    const PerturbationTable table = perturbation_comparison(gens, TimeGrid::make(cfg.T, 128), p, opts);
    json rows = json::object();
    for (const auto& [label, st] : table.rows) rows[label] = {{"C_est", st.levels.front().C_est}, {"variation", st.variation}};
    rep.flag("perturbation_preserved", table.verdict == "preserved", rows);
    if (auto path = out_path(cfg, "perturbation_table.csv"); !path.empty()) write_table_csv(table, path);

    const std::vector<double> mus = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
    const DsChoice fine = heat_ds_choice(cfg.N, TimeGrid::make(cfg.T, cfg.steps), p, mus);
    const json ds_meta = {{"mu", fine.check.mu},
                          {"residual_printed_form", fine.check.residual_printed},
                          {"contractions", vec_json(fine.contractions)}};
    rep.at_most("ds_fixed_point", fine.check.residual, 5e-3, ds_meta);
    rep.at_most("ds_contraction", fine.check.contraction, 0.5, ds_meta);
    // At mu = 1 the discrete identity is exact; a large mu exposes the O(h) term.
    const DsChoice big = heat_ds_choice(cfg.N, TimeGrid::make(cfg.T, cfg.steps), p, {100.0});
    const DsChoice big_c = heat_ds_choice(cfg.N, TimeGrid::make(cfg.T, cfg.steps / 2), p, {100.0});
    const json big_meta = {{"mu", 100.0}, {"residual", big.check.residual}, {"residual_half_steps", big_c.check.residual},
                           {"residual_printed_form", big.check.residual_printed}};
    rep.at_most("ds_fixed_point[mu=100]", big.check.residual, 5e-3, big_meta);
    rep.at_least("ds_fixed_point_halving_ratio[mu=100]", big_c.check.residual / big.check.residual, 1.8, big_meta);
  } else {
    const RefinementStudy st = refinement_study(ap, grid, p, opts);
    rep.at_most("C_est_refinement", st.variation, 0.10, {{"C_est", st.levels.front().C_est}});
  }
  return rep;
}

Report check_heat(const SuiteConfig& cfg) {
  if (!is_heat(cfg)) throw LinalgError("heat checks need --example heat");
  Report rep(cfg.tol_scale);
  const HeatConfig hc = heat_config(cfg, cfg.N);
  json warn = json::array();
  for (const auto& w : hc.validate()) warn.push_back(w);
  const BoundarySystem bs = build_heat(hc);
  const Index n = bs.n_state();
  const std::vector<double> s = heat_nodes(bs);

  const CMatrix a0 = bs.realize_A().A;
  rep.at_most("neumann_null_mode", (a0 * CVector::Ones(n)).norm() / spectral_norm(a0), 1e-12);
  double k_err = 0.0;
  for (int kk = 1; kk <= 4; ++kk) {
    CVector c(n);
    for (Index i = 0; i < n; ++i) c(i) = std::cos(kk * kPi * s[static_cast<size_t>(i)]);
    k_err = std::max(k_err, std::abs((bs.k_state() * c)(0, 0) - ((kk % 2 == 0) ? 0.0 : -2.0)));
  }
  rep.at_most("boundary_functional_on_cosines", k_err, 1e-12);

  const BoundarySystem fav = build_heat(cfg.favard_N);
  const std::vector<double> lambdas = log_grid(10.0, 1e4, 4);
  std::vector<std::vector<double>> fav_rows;
  for (double r : {1.5, 2.0}) {
    const FavardFit fit = favard_exponent_scan(fav, lambdas, r);
    rep.at_most("favard_slope[r=" + std::to_string(r).substr(0, 3) + "]", std::abs(fit.slope - fit.expected), 0.05,
                {{"slope", fit.slope}, {"expected", fit.expected}, {"sup_scaled", fit.sup_scaled}});
    for (size_t i = 0; i < fit.lambdas.size(); ++i) fav_rows.push_back({r, fit.lambdas[i], fit.norms[i]});
    const double num = spatial_norm(fav, fav.dirichlet(100.0).D.col(0), r);
    const double exact = dirichlet_profile_norm(100.0, r);
    rep.at_most("dirichlet_profile[r=" + std::to_string(r).substr(0, 3) + "]", std::abs(num - exact) / exact, 0.01,
                {{"numeric", num}, {"exact", exact}});
  }
  if (auto path = out_path(cfg, "favard.csv"); !path.empty()) write_csv(path, {"r", "lambda", "norm"}, fav_rows);

  const int m = 2001;
  std::vector<double> eps = log_grid(1e-2, 1e2, 10);
  std::vector<double> f(m), df(m), d2f(m), g(m), dg(m), d2g(m);
  for (int i = 0; i < m; ++i) {
    const double x = static_cast<double>(i) / (m - 1);
    f[i] = std::cos(kPi * x);
    df[i] = -kPi * std::sin(kPi * x);
    d2f[i] = -kPi * kPi * std::cos(kPi * x);
    g[i] = x * x;
    dg[i] = 2.0 * x;
    d2g[i] = 2.0;
  }
  const InterpolationCheck ic1 = interpolation_inequality_check(f, df, d2f, eps, cfg.r);
  const InterpolationCheck ic2 = interpolation_inequality_check(g, dg, d2g, eps, cfg.r);
  rep.flag("interpolation_inequality", ic1.holds && ic2.holds,
           {{"min_slack_cos", ic1.min_slack}, {"min_slack_square", ic2.min_slack}});

  for (int N : {cfg.N, 2 * cfg.N}) {
    const AdjointBReport ab = adjoint_B_check(build_heat(N));
    rep.at_least("adjoint_B_concentration[N=" + std::to_string(N) + "]", ab.concentration, 0.95);
    rep.at_most("adjoint_B_pairing[N=" + std::to_string(N) + "]", ab.pairing_residual, 1e-12);
  }

  const TimeGrid grid = TimeGrid::make(cfg.T, cfg.steps / 2);
  const PdeRun run = run_pde(hc, smooth_forcing(grid, n));
  HeatConfig hc_coarse = hc;
  hc_coarse.N = cfg.N / 2;
  const PdeRun run_c = run_pde(hc_coarse, smooth_forcing(grid, build_heat(hc_coarse).n_state()));
  rep.at_most("pde_C_est_N_family", std::abs(run.report.C_est - run_c.report.C_est) / run_c.report.C_est, 0.10,
              {{"C_est", run.report.C_est}, {"C_est_coarse", run_c.report.C_est}, {"warnings", warn}});
  const double wit = (run.norm_dz + run.norm_z + run.norm_Gz) / run.norm_f;
  rep.flag("pde_witness_below_C_est", wit <= run.report.C_est, {{"witness_ratio", wit}});
  if (auto path = out_path(cfg, "heat_solution.csv"); !path.empty()) {
    std::vector<std::vector<double>> rows;
    for (int kk = 0; kk <= grid.n; kk += std::max(1, grid.n / 32)) {
      for (Index i = 0; i < n; ++i) rows.push_back({grid.t(kk), s[static_cast<size_t>(i)], run.z.samples(i, kk).real()});
    }
    write_csv(path, {"t", "s", "w"}, rows);
  }
  // The approach to the steady state is governed by the spectral gap of the
  // perturbed generator: residual(2) / residual(1) must be e^{gap}.
  HeatConfig steady = hc;
  steady.steps = 512;
  const Spectrum sp = eig(bs.realize_perturbed().A);
  std::vector<double> re;
  for (Index i = 0; i < sp.values.size(); ++i) re.push_back(sp.values(i).real());
  std::sort(re.begin(), re.end(), std::greater<>());
  const double gap = re.at(1);
  const double res1 = heat_steady_state_residual(steady, 1.0);
  const double res2 = heat_steady_state_residual(steady, 2.0);
  const double res5 = heat_steady_state_residual(steady, 5.0);
  const double predicted = std::exp(gap);
  const json ss_meta = {{"residual_T1", res1}, {"residual_T2", res2}, {"residual_T5", res5},
                        {"gap", gap}, {"predicted_ratio", predicted}};
  rep.at_most("steady_state", res5, 1e-6, ss_meta);
  rep.at_most("steady_state_gap_rate", std::abs(res2 / res1 - predicted) / predicted, 0.1, ss_meta);
  return rep;
}

Report check_pide(const SuiteConfig& cfg) {
  if (!is_heat(cfg)) throw LinalgError("pide checks need --example heat");
  Report rep(cfg.tol_scale);
  HeatConfig hc = heat_config(cfg, cfg.pide_N);
  hc.T = 1.0;
  const BoundarySystem bs = build_heat(hc);
  const Index n = bs.n_state();
  const Generator gen = bs.realize_perturbed();
  VolterraSpec vspec;
  vspec.kernel.name = "exp";
  vspec.kernel.scale = 0.1;
  vspec.F = heat_fractional_F(bs.realize_A().A, hc.theta_frac, false);
  vspec.S_max = 1.0;

  constexpr int kRefSteps = 8192;
  const BochnerSignal ref = volterra_direct(gen, vspec, smooth_forcing(TimeGrid::make(1.0, kRefSteps), n));
  const double ref_scale = ref.samples.colwise().norm().maxCoeff();
  std::vector<double> cross, err_direct, err_comp;
  std::vector<std::vector<double>> rows;
  bool horizon = false;
  const int levels[3][2] = {{256, 16}, {512, 32}, {1024, 64}};
  for (const auto& lv : levels) {
    vspec.mem_nodes = lv[1];
    const CompanionComparison c = companion_vs_direct(gen, vspec, smooth_forcing(TimeGrid::make(1.0, lv[0]), n));
    const int stride = kRefSteps / lv[0];
    double ed = 0.0, ec = 0.0;
    for (int k = 0; k <= lv[0]; ++k) {
      const CVector r = ref.at(k * stride);
      ed = std::max(ed, (c.direct.at(k) - r).norm());
      ec = std::max(ec, (c.companion_first.at(k) - r).norm());
    }
    cross.push_back(c.rel_diff);
    err_direct.push_back(ed / ref_scale);
    err_comp.push_back(ec / ref_scale);
    horizon = horizon || c.horizon_flag;
    rows.push_back({static_cast<double>(lv[0]), static_cast<double>(lv[1]), c.rel_diff, ed / ref_scale, ec / ref_scale});
  }
  if (auto path = out_path(cfg, "pide_cross_check.csv"); !path.empty()) {
    write_csv(path, {"n", "mem_nodes", "cross_check", "direct_error", "companion_error"}, rows);
  }
  const json meta = {{"N", cfg.pide_N}, {"errors", vec_json(cross)}, {"kernel", "0.1 exp(-t)"},
                     {"theta", hc.theta_frac}};
  rep.at_most("companion_cross_check", cross.back(), 1e-2, meta);
  rep.at_least("companion_halving_ratio", min_ratio(cross), 1.8, meta);
  rep.at_least("direct_reference_halving_ratio", min_ratio(err_direct), 1.8,
               {{"errors", vec_json(err_direct)}, {"reference_steps", kRefSteps}});
  rep.at_least("companion_reference_halving_ratio", min_ratio(err_comp), 1.8,
               {{"errors", vec_json(err_comp)}, {"reference_steps", kRefSteps}});
  rep.flag("memory_horizon_sufficient", !horizon);

  const PideRun run = run_pide(hc, vspec.kernel, smooth_forcing(TimeGrid::make(1.0, 256), n), 16, true, true);
  rep.at_most("fractional_F_dual_path", run.dual_path, 1e-6);
  rep.flag("pide_report_finite", std::isfinite(run.report.C_est) && run.report.converged,
           {{"C_est", run.report.C_est}});
  return rep;
}

Report check_volterra(const SuiteConfig& cfg) {
  Report rep(cfg.tol_scale);
  SectorSpec sector;
  sector.p = 2.0;
  sector.s = 2.0;
  const HoloFn e1 = [](cplx z) { return std::exp(-z); };
  const double exact = std::pow(2.0 * std::tan(sector.theta) / (sector.q() * sector.q()), 1.0 / sector.q());
  const BergmanNorm bn = bergman_norm(e1, sector);
  rep.at_most("bergman_exp_closed_form", std::abs(bn.norm - exact) / exact, 0.005,
              {{"norm", bn.norm}, {"exact", exact}, {"tail", bn.tail_estimate}});
  const double scaled = bergman_norm([&](cplx z) { return 3.5 * e1(z); }, sector).norm;
  rep.at_most("bergman_homogeneity", std::abs(scaled - 3.5 * bn.norm) / (3.5 * bn.norm), 1e-12);

  const std::vector<std::pair<std::string, HoloFn>> family = {
      {"exp(-z)", e1},
      {"exp(-2z)", [](cplx z) { return std::exp(-2.0 * z); }},
      {"1/(1+z)^2", [](cplx z) { return 1.0 / ((1.0 + z) * (1.0 + z)); }}};
  double worst = 0.0, worst_fine = 0.0;
  std::vector<std::vector<double>> rows;
  for (const auto& [name, f] : family) {
    const TraceCheck t1 = bergman_trace_check(f, 1.0, 2.0, sector);
    const TraceCheck t2 = bergman_trace_check(f, 1.0, 2.0, sector.refined(2));
    worst = std::max(worst, t1.ratio);
    worst_fine = std::max(worst_fine, t2.ratio);
    rows.push_back({t1.lhs, t1.rhs_norm, t1.ratio, t2.ratio});
  }
  if (auto path = out_path(cfg, "trace_family.csv"); !path.empty()) {
    write_csv(path, {"lhs", "rhs_norm", "ratio", "ratio_refined"}, rows);
  }
  rep.flag("trace_ratio_finite", std::isfinite(worst) && worst > 0.0, {{"max_ratio", worst}});
  rep.at_most("trace_ratio_refinement", std::abs(worst - worst_fine) / worst_fine, 0.05);

  // Collapse: zero kernel, first component equals plain evolve.
  const BoundarySystem bs = build_heat(cfg.pide_N);
  const Index n = bs.n_state();
  const Generator a0 = bs.realize_A();
  VolterraSpec zero;
  zero.kernel.name = "zero";
  zero.F = CMatrix::Zero(n, n);
  zero.mem_nodes = 16;
  const TimeGrid grid = TimeGrid::make(1.0, 128);
  const BochnerSignal f = smooth_forcing(grid, n);
  const CompanionComparison cz = companion_vs_direct(a0, zero, f);
  const BochnerSignal plain = evolve(a0, CVector::Zero(n), f);
  const double scale = plain.samples.colwise().norm().maxCoeff();
  const double collapse = std::max(cz.rel_diff, (cz.companion_first.samples - plain.samples).colwise().norm().maxCoeff() / scale);
  rep.at_most("companion_zero_kernel_collapse", collapse, 1e-12);

  VolterraSpec memo;
  memo.kernel.scale = 0.1;
  memo.F = CMatrix::Identity(n, n);
  memo.mem_nodes = 16;
  const Companion comp = companion_assemble(a0, memo, 1.0);
  const CMatrix shift_block = comp.gen.A.bottomRightCorner(n * memo.mem_nodes, n * memo.mem_nodes);
  rep.at_most("transport_block_abscissa", spectral_abscissa(shift_block), 0.0,
              {{"gershgorin_bound", comp.gen.omega0}});

  VolterraSpec up;
  up.kernel.name = "exp";
  up.F = build_heat(cfg.N).k_state();
  const UpsilonReport ur = upsilon_admissibility(build_heat(cfg.N).realize_A(), up, sector, 1.0, 2.0);
  const json meta = {{"kappa_upsilon", ur.kappa_upsilon}, {"bound", ur.bound}, {"gamma", ur.gamma},
                     {"bergman_a", ur.bergman_a}, {"slack", ur.slack}};
  rep.at_most("upsilon_bound", ur.kappa_upsilon / ur.bound - 1.0, 0.01, meta);
  rep.at_most("upsilon_rank_one_equality", std::abs(ur.slack), 0.01, meta);
  return rep;
}

Report check_scan(const SuiteConfig& cfg) {
  Report rep(cfg.tol_scale);
  Generator gen;
  CMatrix b, c;
  if (cfg.example == "scalar") {
    gen = Generator::make(CMatrix::Constant(1, 1, -1.0), "scalar");
    b = c = CMatrix::Ones(1, 1);
  } else {
    const BoundarySystem bs = boundary_for(cfg);
    gen = bs.realize_perturbed();
    b = bs.control_vector(1.0).B;
    c = bs.k_state();
  }
  const ScanReport w1 = weis_scan(gen, default_scan_grid(60));
  const ScanReport w2 = weis_scan(gen, default_scan_grid(120));
  rep.at_most("weis_sup_refinement", std::abs(w1.sup - w2.sup) / w2.sup, 0.02, scan_summary(w1));
  rep.flag("weis_bounded", std::isfinite(w1.sup) && w1.verdict == "bounded", scan_summary(w1));
  if (auto path = out_path(cfg, "weis_scan.csv"); !path.empty()) write_scan_csv(w1, path);

  const Generator free = cfg.example == "scalar" ? gen : boundary_for(cfg).realize_A();
  const double omega = std::max(1.0, free.omega0 + 1.0);
  const double q = cfg.p / (cfg.p - 1.0);
  const auto f1 = fractional_scans(free, b, c, omega, 1.0 / cfg.p, 1.0 / q, default_scan_grid(60));
  const auto f2 = fractional_scans(free, b, c, omega, 1.0 / cfg.p, 1.0 / q, default_scan_grid(120));
  rep.at_most("fractional_B_refinement", std::abs(f1.first.sup - f2.first.sup) / f2.first.sup, 0.02,
              scan_summary(f1.first));
  rep.at_most("fractional_C_refinement", std::abs(f1.second.sup - f2.second.sup) / f2.second.sup, 0.02,
              scan_summary(f1.second));
  rep.flag("fractional_bounded", f1.first.verdict == "bounded" && f1.second.verdict == "bounded");
  if (auto path = out_path(cfg, "fractional_scan_B.csv"); !path.empty()) write_scan_csv(f1.first, path);
  if (auto path = out_path(cfg, "fractional_scan_C.csv"); !path.empty()) write_scan_csv(f1.second, path);

  const auto hp = [&](int per_decade) { return halfplane_grid(omega, 1e-2, 1e4, per_decade, 5); };
  const ScanReport an1 = analyticity_scan(free, omega, hp(20));
  const ScanReport an2 = analyticity_scan(free, omega, hp(40));
  rep.at_most("analyticity_sup_refinement", std::abs(an1.sup - an2.sup) / an2.sup, 0.02, scan_summary(an1));
  std::vector<double> shift_sups;
  // Vertical line Re = 2: fixed-angle rays cannot see the missing sector.
  std::vector<cplx> line;
  for (double y : log_grid(1e-2, 1e4, 10)) {
    line.emplace_back(2.0, y);
    line.emplace_back(2.0, -y);
  }
  for (int m : {8, 32, 128}) shift_sups.push_back(analyticity_scan(centred_transport(m), 1.0, line).sup);
  rep.flag("shift_control_not_analytic", family_verdict(shift_sups) == "unbounded-looking",
           {{"sups", vec_json(shift_sups)}, {"cells", {8, 32, 128}}});

  // Contour fractional powers on the shifted Neumann Laplacian.
  {
    const BoundarySystem nb = build_heat(32);
    const CMatrix a = nb.realize_A().A - CMatrix::Identity(nb.n_state(), nb.n_state());
    const CMatrix kc = nb.k_state();
    const CMatrix exact = frac_power_eig(a, 0.6);
    const double scale = spectral_norm(exact);
    const CMatrix contour = frac_power_contour(a, 0.6);
    rep.at_most("contour_vs_eigendecomposition", spectral_norm(contour - exact) / scale, 1e-6);
    const CMatrix j = J_operator(kc, a, 0.6);
    const CMatrix j_exact = kc * exact;
    rep.at_most("contour_J_operator", spectral_norm(j - j_exact) / spectral_norm(j_exact), 1e-8);
    double angle = 0.0;
    for (double psi : {0.6 * kPi, 0.85 * kPi}) {
      ContourSpec spec;
      spec.psi = psi;
      angle = std::max(angle, spectral_norm(frac_power_contour(a, 0.6, spec) - contour) / scale);
    }
    rep.at_most("contour_angle_independence", angle, 1e-7, {{"psi", {0.6, 0.75, 0.85}}});
    ContourSpec fine;
    fine.n_per_leg *= 2;
    const double jn = spectral_norm(J_operator(kc, a, 0.75)), jf = spectral_norm(J_operator(kc, a, 0.75, fine));
    rep.at_most("contour_J_refinement", std::abs(jn - jf) / jf, 0.01, {{"norm", jn}, {"norm_refined", jf}});
    const PerturbationBound pb = small_perturbation_bound(frac_power_eig(a, -0.6), a, 0.6);
    rep.at_most("perturbation_bound_exact_power", std::abs(pb.c - 1.0), 1e-6, {{"c", pb.c}, {"holds", pb.holds}});
    const DecayFit fit = resolvent_decay_fit(kc, nb.realize_A().A, log_grid(1e2, 1e5, 4));
    rep.at_least("observation_decay_rate", -fit.slope, 0.4, {{"slope", fit.slope}, {"M", fit.M}});
  }

  // Negative control: rotation generator pushed towards the imaginary axis.
  std::vector<double> sups;
  for (double eps : {1.0, 1e-1, 1e-2, 1e-3}) {
    CMatrix rot(2, 2);
    rot << -eps, 1.0, -1.0, -eps;
    sups.push_back(weis_scan(Generator::make(rot, "rotation"), default_scan_grid(60)).sup);
  }
  rep.flag("skew_control_unbounded", family_verdict(sups) == "unbounded-looking", {{"sups", vec_json(sups)}});
  return rep;
}

const std::vector<std::string>& check_groups() {
  static const std::vector<std::string> groups = {"identities", "admissibility", "maxreg", "heat",
                                                  "pide",       "volterra",      "scan"};
  return groups;
}

Report run_group(const std::string& name, const SuiteConfig& cfg) {
  cfg.validate();
  if (name == "identities") return check_identities(cfg);
  if (name == "admissibility") return check_admissibility(cfg);
  if (name == "maxreg") return check_maxreg(cfg);
  if (name == "heat") return check_heat(cfg);
  if (name == "pide") return check_pide(cfg);
  if (name == "volterra") return check_volterra(cfg);
  if (name == "scan") return check_scan(cfg);
  if (name == "suite") return check_suite(cfg);
  throw LinalgError("unknown check group '" + name + "'");
}

Report check_suite(const SuiteConfig& cfg) {
  Report all(cfg.tol_scale);
  for (const auto& g : check_groups()) {
    const bool needs_boundary = g == "identities" || g == "heat" || g == "pide";
    if (cfg.example == "scalar" && needs_boundary) continue;
    if (cfg.example == "custom" && (g == "heat" || g == "pide")) continue;
    all.merge(run_group(g, cfg));
  }
  return all;
}

}  // namespace mrlab
