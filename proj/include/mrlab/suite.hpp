#pragma once

// Check groups behind the command-line runner. Each group evaluates one
// module's assertions on an example system, records them in a Report and
// writes CSV detail tables when an output directory is set.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrlab/maxreg.hpp"
#include "mrlab/report.hpp"

namespace mrlab {

struct SuiteConfig {
  std::string example = "heat";  // heat | scalar | custom
  int N = 64;
  double r = 2.0;
  double p = 2.0;
  double T = 1.0;
  int steps = 512;
  std::uint64_t seed = 7;
  double tol_scale = 1.0;
  std::vector<cplx> lambdas;  // empty: 5, 1+i, 10+3i
  int pide_N = 32;            // product-space runs are cubic in N * memory nodes
  int favard_N = 1024;        // Dirichlet decay needs cells far below 1/sqrt(lambda_max)
  std::string out_dir;        // empty: no CSV output
  nlohmann::json custom;      // boundary description for example = custom

  /// Throws LinalgError naming the offending parameter.
  void validate() const;
  /// Reads keys of the same names; unknown keys are rejected.
  static SuiteConfig from_json(const nlohmann::json& j);
};

Report check_identities(const SuiteConfig& cfg);
Report check_admissibility(const SuiteConfig& cfg);
Report check_maxreg(const SuiteConfig& cfg);
Report check_heat(const SuiteConfig& cfg);
Report check_pide(const SuiteConfig& cfg);
Report check_volterra(const SuiteConfig& cfg);
Report check_scan(const SuiteConfig& cfg);
/// All groups the example supports.
Report check_suite(const SuiteConfig& cfg);

/// Subcommand names in run order, and dispatch by name.
const std::vector<std::string>& check_groups();
Report run_group(const std::string& name, const SuiteConfig& cfg);

/// Smallest mu on the grid with |F^mu| <= 1/2 for the bounded averaging
/// functional (heat example), with the identity residual at that mu.
struct DsChoice {
  FixedPointCheck check;
  std::vector<double> mu_grid;
  std::vector<double> contractions;
};
DsChoice heat_ds_choice(int N, const TimeGrid& grid, double p, const std::vector<double>& mu_grid);

}  // namespace mrlab
