#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pmlbie/cli.hpp"

using namespace pmlbie;
using namespace pmlbie::cli;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("pmlbie_test_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(PMLBIE_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const json kSmall = {{"scene", "disc2d"}, {"bc", "dirichlet"}, {"k_over_pi", 1.0}, {"disc", {{"N", 8}}}};

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c = parse_config(json::object());
  CHECK(c.scene == geometry::SceneKind::disc2d);
  CHECK(c.k == doctest::Approx(kPi));
  CHECK(c.disc.n_beta == 200);
  CHECK(c.strength == 6.0);
  CHECK(c.order == 6);
  CHECK(c.t_over_lambda == 2.0);
  CHECK(c.gmres.tol == 1e-12);
  CHECK(wavelength(c) == doctest::Approx(2.0));
}

TEST_CASE("validation errors name the field") {
  CHECK(error_of({{"disc", {{"N", 2.5}}}}) == "config.disc.N: expected an integer");
  CHECK(error_of({{"disc", {{"N", 2}}}}) == "config.disc.N: must be >= 4");
  CHECK(error_of({{"sceen", "disc2d"}}) == "config.sceen: unknown key");
  CHECK(error_of({{"pml", {{"S", -1.0}}}}) == "config.pml.S: must be positive");
  CHECK(error_of({{"k", 1.0}, {"k_over_pi", 1.0}}).find("either") != std::string::npos);
  CHECK(error_of({{"convergence", {{"N", {32, 16}}}}}) == "config.convergence.N: entries must increase");
  CHECK(error_of({{"scene", "torus"}}).find("torus") != std::string::npos);
  CHECK(error_of(json::array()) != "");
  CHECK(error_of({{"comment", "free text is allowed"}}) == "");
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(3.0) == "3");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-HUGE_VAL) == "-inf");
  TableRow r;
  r.k = kPi;
  r.n = 16;
  r.n_dof = 96;
  r.n_iter = 13;
  r.residual = 1e-13;
  r.eps_inf = 2.5e-3;
  r.t_precompute_s = 1.5;
  const std::string blank = table_csv({r}, false);
  CHECK(blank == "k,N,N_DOF,N_iter,residual,eps_inf,t_precompute_s,t_iter_s\n"
                 "3.1415926535897931,16,96,13,1e-13,0.0025000000000000001,,\n");
  CHECK(table_csv({r}, true).find(",1.5,0\n") != std::string::npos);
}

TEST_CASE("problem construction") {
  RunConfig c = parse_config(kSmall);
  const solve::ProblemSpec p = make_problem(c, 8, 2.0);
  CHECK(p.scene->patches.size() == 6);
  CHECK(p.scene->profile.thickness(0) == doctest::Approx(4.0));
  const RunConfig b = parse_config({{"scene", "ball3d"}});
  CHECK(dimension(b.scene) == 3);
  CHECK(make_problem(b, 4, 2.0).scene->patches.size() * 16 == 672);
}

TEST_CASE("run writes deterministic artifacts") {
  const RunConfig c = parse_config(kSmall);
  std::ostringstream log;
  const auto d1 = scratch("a"), d2 = scratch("b");
  const RunResult r1 = run(Experiment::solve, c, d1.string(), 1, log);
  const RunResult r2 = run(Experiment::solve, c, d2.string(), 1, log);
  REQUIRE(r1.status == 0);
  REQUIRE(r2.status == 0);
  CHECK(r1.rows.front().n_dof == 6 * 8);
  const std::string t1 = slurp(d1 / "table.csv");
  CHECK(t1 == slurp(d2 / "table.csv"));
  CHECK(t1.rfind("k,N,N_DOF,N_iter,residual,eps_inf,t_precompute_s,t_iter_s\n", 0) == 0);
  const std::string field = slurp(d1 / "field.csv");
  CHECK(field.rfind("x1,x2,re_u,im_u,abs_u\n", 0) == 0);
  const json rj = json::parse(slurp(d1 / "run.json"));
  CHECK(rj["status"] == "ok");
  CHECK(rj["config"]["disc"]["N"] == 8);
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("field experiment grid") {
  json j = kSmall;
  j["field"] = {{"x1", {-2.0, 2.0, 5}}, {"x2", {0.5, 3.5, 4}}};
  std::ostringstream log;
  const auto d = scratch("field");
  REQUIRE(run(Experiment::field, parse_config(j), d.string(), 1, log).status == 0);
  std::istringstream in(slurp(d / "field.csv"));
  std::string line;
  int rows = 0, nan_rows = 0;
  std::getline(in, line);
  CHECK(line == "x1,x2,re_u,im_u,abs_u");
  while (std::getline(in, line)) {
    ++rows;
    if (line.find("nan") != std::string::npos) ++nan_rows;
  }
  CHECK(rows == 20);
  CHECK(nan_rows >= 1);  // (0, 2) lies inside the disc
  std::filesystem::remove_all(d);
}

TEST_CASE("exit codes") {
  const auto d = scratch("exit");
  std::filesystem::create_directories(d);
  {
    std::ofstream(d / "bad.json") << R"({"disc": {"N": "many"}})";
    std::ofstream(d / "stall.json") << R"({"disc": {"N": 8}, "gmres": {"max_iter": 1}})";
    std::ofstream(d / "ok.json") << kSmall.dump();
  }
  CHECK(run_cli("solve --config " + (d / "bad.json").string() + " --out " + (d / "o1").string()) == 1);
  CHECK(run_cli("solve --config " + (d / "missing.json").string() + " --out " + (d / "o2").string()) == 1);
  CHECK(run_cli("solve --bogus") == 1);
  CHECK(run_cli("solve --config " + (d / "stall.json").string() + " --out " + (d / "o3").string()) == 2);
  CHECK(std::filesystem::exists(d / "o3" / "run.json"));
  CHECK(run_cli("solve --config " + (d / "ok.json").string() + " --threads 1 --out " + (d / "o4").string()) == 0);
  std::filesystem::remove_all(d);
}
