#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "fibdyn/runner.hpp"

using namespace fibdyn;

namespace {

std::string out_dir(const std::string& leaf) {
  return std::string(FIBDYN_TEST_OUT_DIR) + "/" + leaf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json degenerate_base_map() {
  return {{"theta0", {{"degree", 2}, {"coeffs", {{1, 0}, {0, 0}, {0, 0}}}}},
          {"theta1", {{"degree", 2}, {"coeffs", {{0, 0}, {1, 0}, {0, 0}}}}},
          {"R", {{"degree", 2}, {"terms", {{{"exp", {0, 0, 2}}, {"c", {1, 0}}}}}}}};
}

}  // namespace

TEST_CASE("validate subcommand", "[cli]") {
  RunOptions opt;
  opt.subcommand = "validate";
  opt.config = {{"map", "torus"}};
  opt.out_dir = out_dir("validate_torus");
  RunResult res = run(opt);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.report.at("version") == FIBDYN_VERSION);
  REQUIRE(res.report.contains("config_hash"));

  opt.config = {{"map", degenerate_base_map()}};
  opt.out_dir = out_dir("validate_bad");
  res = run(opt);
  REQUIRE(res.exit_code == 3);
  bool named = false;
  for (const auto& c : res.report.at("validation"))
    if (c.at("name") == "base_resultant" && !c.at("pass").get<bool>()) named = true;
  REQUIRE(named);
}

TEST_CASE("config strictness", "[cli]") {
  RunOptions opt;
  opt.subcommand = "validate";
  opt.config = {{"map", "torus"}, {"naps", 3}};
  REQUIRE_THROWS_AS(run(opt), ConfigError);
  opt.config = {{"map", "no_such_builtin"}};
  REQUIRE_THROWS_AS(run(opt), ConfigError);
  // through the exit-code wrapper these are config failures
  opt.out_dir = out_dir("config_err");
  REQUIRE(run_and_write(opt) == 2);
}

TEST_CASE("bj-check on the torus", "[cli]") {
  RunOptions opt;
  opt.subcommand = "bj-check";
  opt.config = {{"map", "torus"}, {"n", 20000}};
  opt.out_dir = out_dir("bj_torus");
  RunResult res = run(opt);
  REQUIRE(res.exit_code == 0);
  REQUIRE(std::abs(res.report.at("discrepancy").at("value").get<double>()) <= 2e-3);
  // every reported numeric carries its uncertainty companion
  REQUIRE(res.report.at("lambda_sigma_direct").contains("se"));
  REQUIRE(res.report.at("pairing").contains("se"));
  REQUIRE(res.report.at("discrepancy").contains("band"));
}

TEST_CASE("decomp-check on the coupled map", "[cli]") {
  RunOptions opt;
  opt.subcommand = "decomp-check";
  opt.config = {{"map", "cheb_coupled"}, {"n", 20000}, {"outer", 150}, {"inner", 150}};
  opt.out_dir = out_dir("decomp_cheb");
  RunResult res = run(opt);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.report.at("moments").size() == 6);
  for (const auto& row : res.report.at("moments")) {
    REQUIRE(row.at("direct").contains("se"));
    REQUIRE(row.at("nested").contains("se"));
  }
}

TEST_CASE("green grid artifact", "[cli]") {
  RunOptions opt;
  opt.subcommand = "green";
  opt.config = {{"map", "torus"}, {"fiber", {1.0, 0.0}},
                {"rect", {-2.0, 2.0, -2.0, 2.0}}, {"res", {8, 8}}, {"pgm", true}};
  opt.out_dir = out_dir("green_torus");
  RunResult res = run(opt);
  REQUIRE(res.exit_code == 0);
  const std::string csv = slurp(out_dir("green_torus") + "/green.csv");
  REQUIRE(csv.rfind("i,j,value,bound", 0) == 0);
  REQUIRE(slurp(out_dir("green_torus") + "/green.pgm").rfind("P5", 0) == 0);
}

TEST_CASE("reruns are byte-identical", "[cli]") {
  RunOptions opt;
  opt.subcommand = "sample";
  opt.config = {{"map", "cheb_coupled"}, {"method", "equilibrium"}, {"n", 500},
                {"seed", 7}};
  opt.out_dir = out_dir("sample_a");
  REQUIRE(run(opt).exit_code == 0);
  opt.out_dir = out_dir("sample_b");
  REQUIRE(run(opt).exit_code == 0);
  REQUIRE(slurp(out_dir("sample_a") + "/sample.csv") ==
          slurp(out_dir("sample_b") + "/sample.csv"));
}

TEST_CASE("lyapunov and periodic-check subcommands", "[cli]") {
  RunOptions opt;
  opt.subcommand = "lyapunov";
  opt.config = {{"map", "cheb_coupled"}, {"n", 20000}};
  opt.out_dir = out_dir("lyap_cheb");
  RunResult res = run(opt);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.report.at("lambda_sigma").contains("se"));
  REQUIRE(res.report.at("lambda_0").at("value").get<double>() == 0.0);

  opt.subcommand = "periodic-check";
  opt.config = {{"map", "cheb_coupled"}, {"n", 20000}, {"n_list", {3, 4, 5}}};
  opt.out_dir = out_dir("periodic_cheb");
  res = run(opt);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.report.at("periodic").size() == 3);
}

TEST_CASE("bif-scan smoke", "[cli]") {
  RunOptions opt;
  opt.subcommand = "bif-scan";
  json family = {{"builtin", "coupled_family"}};
  opt.config = {{"family", family}, {"mode", "sigma"}, {"res", {12, 12}}, {"n", 500}};
  opt.out_dir = out_dir("bif_smoke");
  opt.workers = 2;
  RunResult res = run(opt);
  REQUIRE(res.exit_code == 0);
  REQUIRE(slurp(out_dir("bif_smoke") + "/grid.csv").rfind("i,j,", 0) == 0);
  REQUIRE(slurp(out_dir("bif_smoke") + "/density.pgm").rfind("P5", 0) == 0);
  REQUIRE(res.report.contains("eps_noise"));

  opt.config = {{"family", family}, {"mode", "periodic"}, {"res", {8, 8}},
                {"period", 3}};
  opt.out_dir = out_dir("bif_periodic_smoke");
  res = run(opt);
  REQUIRE(res.exit_code == 0);
}

TEST_CASE("map serialization round trip", "[cli]") {
  for (const char* key : {"torus", "cheb_coupled", "desboves"}) {
    FiberedMap f = builtin_map(key);
    FiberedMap g = map_from_json(to_json(f));
    REQUIRE(g.valid() == f.valid());
    REQUIRE(g.degree() == f.degree());
    Rng rng(71);
    for (int i = 0; i < 20; ++i) {
      Pt2 x({rng.gaussian(), rng.gaussian(), rng.gaussian()});
      REQUIRE(chordal(apply(f, x), apply(g, x)) < 1e-14);
    }
  }
  // affine-only specification reconstructs the homogeneous lift
  json aff = {{"affine",
               {{"p", {{"degree", 2}, {"coeffs", {{0, 0}, {0, 0}, {1, 0}}}}},
                {"q",
                 {{"degree", 2},
                  {"terms",
                   {{{"exp", {0, 2}}, {"c", {1, 0}}}, {{"exp", {1, 0}}, {"c", {1, 0}}}}}}}}}};
  FiberedMap skew = map_from_json(aff);
  REQUIRE(skew.valid());
  auto tz = apply_affine(skew, cplx(1.0), cplx(1.0));
  REQUIRE(std::abs(tz[1] - 2.0) < 1e-14);
}
