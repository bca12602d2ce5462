// Command-line runner for the check groups.
//
//   mrlab <group> [--config file.json] [--example heat|scalar|custom] [--N 64] ...
//
// Exit codes: 0 all checks pass, 1 some check failed, 2 usage or config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mrlab/suite.hpp"

namespace {

std::complex<double> parse_lambda(const std::string& text) {
  // Accepts "5", "1+1i", "10-3i".
  std::string s = text;
  if (s.empty()) throw mrlab::LinalgError("lambda: empty value");
  if (s.back() != 'i') {
    size_t pos = 0;
    const double re = std::stod(s, &pos);
    if (pos != s.size()) throw mrlab::LinalgError("lambda: cannot parse '" + text + "'");
    return {re, 0.0};
  }
  s.pop_back();
  const size_t split = s.find_last_of("+-");
  if (split == std::string::npos || split == 0) {
    return {0.0, s.empty() || s == "+" ? 1.0 : std::stod(s)};
  }
  size_t pos = 0;
  const double re = std::stod(s.substr(0, split), &pos);
  if (pos != split) throw mrlab::LinalgError("lambda: cannot parse '" + text + "'");
  const std::string im_text = s.substr(split);
  const double im = im_text.size() == 1 ? (im_text == "-" ? -1.0 : 1.0) : std::stod(im_text);
  return {re, im};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximal regularity and boundary perturbation checks"};
  app.require_subcommand(0, 1);

  std::string config_path, example, out;
  int N = 0, steps = 0;
  double r = 0.0, p = 0.0, T = 0.0, tol_scale = 0.0;
  long long seed = -1;
  std::vector<std::string> lambdas;

  std::vector<std::string> groups = mrlab::check_groups();
  groups.push_back("suite");
  for (const auto& g : groups) {
    CLI::App* sub = app.add_subcommand(g, g == "suite" ? "run every group the example supports" : "run the " + g + " checks");
    sub->add_option("--config", config_path, "JSON config; flags override its values")->check(CLI::ExistingFile);
    sub->add_option("--example", example, "heat | scalar | custom");
    sub->add_option("--N", N, "spatial cells");
    sub->add_option("--r", r, "spatial Lebesgue exponent");
    sub->add_option("--p", p, "temporal Lebesgue exponent");
    sub->add_option("--T", T, "time horizon");
    sub->add_option("--steps", steps, "time steps (multiple of 16)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", out, "output directory for summary.json and CSV tables");
    sub->add_option("--tol-scale", tol_scale, "multiply every tolerance by this factor");
    sub->add_option("--lambda", lambdas, "spectral parameter, e.g. 5 or 1+2i (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  const std::string group = app.get_subcommands().front()->get_name();

  mrlab::SuiteConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw mrlab::LinalgError("config: " + config_path + " is not valid JSON (" + e.what() + ")");
      }
      cfg = mrlab::SuiteConfig::from_json(j);
    }
    if (!example.empty()) cfg.example = example;
    if (N != 0) cfg.N = N;
    if (r != 0.0) cfg.r = r;
    if (p != 0.0) cfg.p = p;
    if (T != 0.0) cfg.T = T;
    if (steps != 0) cfg.steps = steps;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (tol_scale != 0.0) cfg.tol_scale = tol_scale;
    if (!out.empty()) cfg.out_dir = out;
    if (!lambdas.empty()) {
      cfg.lambdas.clear();
      for (const auto& l : lambdas) cfg.lambdas.push_back(parse_lambda(l));
    }
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "mrlab: " << e.what() << "\n";
    return 2;
  }

  mrlab::Report rep;
  try {
    rep = mrlab::run_group(group, cfg);
  } catch (const std::exception& e) {
    std::cerr << "mrlab " << group << ": " << e.what() << "\n";
    return 2;
  }

  for (const auto& rec : rep.records()) {
    std::cout << (rec.pass ? "PASS " : "FAIL ") << rec.check << "  value=" << rec.value
              << "  tol=" << rec.tolerance << "\n";
  }
  nlohmann::json summary = {{"group", group},
                            {"example", cfg.example},
                            {"all_pass", rep.all_pass()},
                            {"checks", rep.to_json()}};
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream(std::filesystem::path(cfg.out_dir) / "summary.json") << summary.dump(2) << "\n";
  }
  if (!rep.all_pass()) {
    std::cerr << "failed checks:";
    for (const auto& f : rep.failed()) std::cerr << " " << f;
    std::cerr << "\n";
    return 1;
  }
  return 0;
}
