#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrlab/report.hpp"
#include "mrlab/suite.hpp"

using namespace mrlab;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("report thresholds") {
  Report r;
  CHECK(r.at_most("a", 1.0, 1.0).pass);
  CHECK_FALSE(r.at_most("b", 1.1, 1.0).pass);
  CHECK(r.at_least("c", 2.0, 1.8).pass);
  CHECK_FALSE(r.at_least("d", std::nan(""), 1.8).pass);
  CHECK_FALSE(r.at_most("e", std::nan(""), 1.0).pass);
  CHECK(r.flag("f", true).value == 1.0);
  CHECK_FALSE(r.all_pass());
  CHECK(r.failed() == std::vector<std::string>{"b", "d", "e"});

  Report loose(2.0);
  CHECK(loose.at_most("a", 1.5, 1.0).pass);
  CHECK(loose.at_least("b", 1.0, 1.8).pass);
  loose.merge(r);
  CHECK(loose.records().size() == 8);
}

TEST_CASE("json schema") {
  Report r;
  r.at_most("x", 0.5, 1.0, {{"note", "ok"}});
  const json j = r.to_json();
  REQUIRE(j.is_array());
  for (const char* key : {"check", "value", "tolerance", "pass", "meta"}) CHECK(j[0].contains(key));
  CHECK(j[0]["meta"]["note"] == "ok");
  const auto path = (std::filesystem::temp_directory_path() / "mrlab_report.json").string();
  r.write_json(path);
  CHECK(json::parse(slurp(path)) == j);
}

TEST_CASE("csv format") {
  const auto path = (std::filesystem::temp_directory_path() / "mrlab_table.csv").string();
  write_csv(path, {"a", "b"}, {{0.1, 1.0 / 3.0}});
  const std::string text = slurp(path);
  CHECK(text.rfind("a,b\n", 0) == 0);
  CHECK(text.find("0.10000000000000001,0.33333333333333331") != std::string::npos);
}

TEST_CASE("suite config") {
  SuiteConfig c = SuiteConfig::from_json({{"example", "heat"}, {"N", 32}, {"lambda", {5.0, {1.0, 2.0}}}});
  CHECK(c.N == 32);
  REQUIRE(c.lambdas.size() == 2);
  CHECK(c.lambdas[1] == cplx(1.0, 2.0));
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(SuiteConfig::from_json({{"bogus", 1}}), LinalgError);
  auto bad = [](auto mutate) {
    SuiteConfig s;
    mutate(s);
    try {
      s.validate();
    } catch (const LinalgError& e) {
      return std::string(e.what()).rfind("config:", 0) == 0;
    }
    return false;
  };
  CHECK(bad([](SuiteConfig& s) { s.N = 4; }));
  CHECK(bad([](SuiteConfig& s) { s.p = 1.0; }));
  CHECK(bad([](SuiteConfig& s) { s.steps = 100; }));
  CHECK(bad([](SuiteConfig& s) { s.example = "wave"; }));
  CHECK(bad([](SuiteConfig& s) { s.tol_scale = 0.0; }));
  CHECK_THROWS(run_group("nonsense", SuiteConfig{}));
}

TEST_CASE("scalar suite passes") {
  SuiteConfig c;
  c.example = "scalar";
  c.N = 8;
  const Report r = run_group("admissibility", c);
  CHECK(r.all_pass());
}
