#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "glasso/errors.hpp"
#include "glasso/io.hpp"

using namespace glasso;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("glasso_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GLASSO_CLI_PATH) + " " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string identity_cov_csv(std::size_t p) {
  std::ostringstream out;
  for (std::size_t j = 0; j < p; ++j) out << (j ? "," : "") << "v" << j;
  out << '\n';
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) out << (j ? "," : "") << (i == j ? "1" : "0");
    out << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("observations csv with header") {
  const fs::path p = write_file("obs.csv",
                                "x,y,z\n"
                                "1,2,3\n"
                                "4,5,6\n"
                                "7,8,10\n"
                                "2,1,0\n"
                                "0,3,5\n");
  const Dataset data = read_observations_csv(p.string());
  CHECK(data.n() == 5);
  CHECK(data.p() == 3);
  CHECK(data.names == std::vector<std::string>{"x", "y", "z"});
  CHECK(data.rows(2, 2) == 10.0);
  CHECK(data.column_means[0] == doctest::Approx(2.8));
}

TEST_CASE("headerless observations get default names") {
  const fs::path p = write_file("obs_nohdr.csv", "1,2\n3,4\n5,7\n");
  const Dataset data = read_observations_csv(p.string());
  CHECK(data.n() == 3);
  CHECK(data.names == std::vector<std::string>{"col0", "col1"});
}

TEST_CASE("covariance csv round trip and validation") {
  const fs::path ident = write_file("ident.csv", identity_cov_csv(4));
  const CovarianceInput in = read_covariance_csv(ident.string());
  CHECK(in.s == SymMatrix::identity(4));
  CHECK(in.names.size() == 4);

  const fs::path asym = write_file("asym.csv",
                                   "a,b\n"
                                   "1,0.5\n"
                                   "0.501,1\n");
  CHECK_THROWS_AS(read_covariance_csv(asym.string()), AsymmetricInput);

  // asymmetry below 1e-10 is averaged away
  const fs::path tiny = write_file("tiny_asym.csv",
                                   "a,b\n"
                                   "1,0.5000000000000222\n"
                                   "0.5,1\n");
  const CovarianceInput averaged = read_covariance_csv(tiny.string());
  CHECK(averaged.s(0, 1) == doctest::Approx(0.5000000000000111).epsilon(1e-15));
  CHECK(averaged.s(0, 1) == averaged.s(1, 0));
}

TEST_CASE("parse errors carry positions") {
  const fs::path bad = write_file("bad_cell.csv",
                                  "a,b\n"
                                  "1,2\n"
                                  "3,oops\n");
  try {
    read_observations_csv(bad.string());
    FAIL("expected NonNumericCell");
  } catch (const NonNumericCell& e) {
    CHECK(e.line == 3);
    CHECK(e.column == 2);
  }

  const fs::path ragged = write_file("ragged.csv",
                                     "a,b,c\n"
                                     "1,2,3\n"
                                     "4,5\n");
  CHECK_THROWS_AS(read_observations_csv(ragged.string()), ParseError);

  CHECK_THROWS_AS(read_observations_csv((scratch_dir() / "missing.csv").string()), ParseError);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, -3.0, 1.0 / 3.0, 1e-300, 123456789.123456789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("cli fit on identity covariance") {
  const fs::path in = write_file("fit_ident.csv", identity_cov_csv(3));
  const fs::path out = scratch_dir() / "fit_ident.json";
  const int rc = run_cli("fit -i " + in.string() + " --input-kind covariance --rho 0.1 -o " +
                         out.string());
  CHECK(rc == 0);
  const json result = json::parse(read_file(out));
  CHECK(result["converged"] == true);
  CHECK(result["edges"].empty());
  CHECK(result["kkt"]["passed"] == true);
  for (int i = 0; i < 3; ++i)
    CHECK(result["Theta"][i][i].get<double>() == doctest::Approx(1.0 / 1.1).epsilon(1e-12));
}

TEST_CASE("cli fit dot output lists undirected edges") {
  const fs::path in = write_file("fit_dot.csv",
                                 "a,b\n"
                                 "1,0.5\n"
                                 "0.5,1\n");
  const fs::path out = scratch_dir() / "fit_dot.dot";
  const int rc = run_cli("fit -i " + in.string() +
                         " --input-kind covariance --rho 0.05 -f dot -o " + out.string());
  CHECK(rc == 0);
  const std::string text = read_file(out);
  CHECK(text.find("graph precision {") != std::string::npos);
  CHECK(text.find("\"a\" -- \"b\" [weight=") != std::string::npos);
}

TEST_CASE("cli determinism: identical seeds give byte-identical outputs") {
  const fs::path a = scratch_dir() / "sim_a.csv";
  const fs::path b = scratch_dir() / "sim_b.csv";
  REQUIRE(run_cli("simulate --kind sparse --p 6 --n 40 --seed 9 -o " + a.string()) == 0);
  REQUIRE(run_cli("simulate --kind sparse --p 6 --n 40 --seed 9 -o " + b.string()) == 0);
  CHECK(read_file(a) == read_file(b));

  const fs::path cv_a = scratch_dir() / "cv_a.json";
  const fs::path cv_b = scratch_dir() / "cv_b.json";
  REQUIRE(run_cli("cv -i " + a.string() + " --folds 4 --seed 3 --scheme regression -o " +
                  cv_a.string()) == 0);
  REQUIRE(run_cli("cv -i " + a.string() + " --folds 4 --seed 3 --scheme regression -o " +
                  cv_b.string()) == 0);
  CHECK(read_file(cv_a) == read_file(cv_b));

  const fs::path c = scratch_dir() / "sim_c.csv";
  REQUIRE(run_cli("simulate --kind sparse --p 6 --n 40 --seed 10 -o " + c.string()) == 0);
  CHECK(read_file(a) != read_file(c));
}

TEST_CASE("cli round trip: fitted Theta fed to invert reproduces W") {
  const fs::path data = scratch_dir() / "rt_data.csv";
  REQUIRE(run_cli("simulate --kind sparse --p 5 --n 400 --seed 21 -o " + data.string()) == 0);
  const fs::path fit_out = scratch_dir() / "rt_fit.json";
  REQUIRE(run_cli("fit -i " + data.string() + " --rho 0.05 --tol 1e-7 -o " + fit_out.string()) ==
          0);
  const json fit = json::parse(read_file(fit_out));

  std::ostringstream cov;
  const auto& names = fit["names"];
  for (std::size_t j = 0; j < names.size(); ++j) cov << (j ? "," : "") << names[j].get<std::string>();
  cov << '\n';
  for (const auto& row : fit["Theta"]) {
    bool first = true;
    for (const auto& v : row) {
      cov << (first ? "" : ",") << format_double(v.get<double>());
      first = false;
    }
    cov << '\n';
  }
  const fs::path theta_csv = write_file("rt_theta.csv", cov.str());
  const fs::path inv_out = scratch_dir() / "rt_invert.json";
  REQUIRE(run_cli("invert -i " + theta_csv.string() + " -o " + inv_out.string()) == 0);
  const json inv = json::parse(read_file(inv_out));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(inv["Theta"][i][j].get<double>() ==
            doctest::Approx(fit["W"][i][j].get<double>()).epsilon(1e-6));
}

TEST_CASE("cli exit codes map error classes") {
  // not positive definite covariance -> 3
  const fs::path npd = write_file("npd.csv",
                                  "a,b\n"
                                  "1,2\n"
                                  "2,1\n");
  CHECK(run_cli("fit -i " + npd.string() + " --input-kind covariance --rho 0 -o /dev/null") == 3);

  // asymmetric input -> 2
  const fs::path asym = write_file("asym2.csv",
                                   "a,b\n"
                                   "1,0.6\n"
                                   "0.5,1\n");
  CHECK(run_cli("fit -i " + asym.string() + " --input-kind covariance --rho 0.1 -o /dev/null") ==
        2);

  // degenerate data -> 5
  const fs::path degen = write_file("degen.csv",
                                    "a,b\n"
                                    "1,7\n"
                                    "2,7\n"
                                    "3,7\n");
  CHECK(run_cli("fit -i " + degen.string() + " --rho 0.1 -o /dev/null") == 5);

  // unbracketable calibration -> 6
  const fs::path ident = write_file("ident6.csv", identity_cov_csv(3));
  CHECK(run_cli("fit -i " + ident.string() +
                " --input-kind covariance --rho-auto 4 -o /dev/null") == 6);

  // non-convergence -> 4, output still written with converged=false
  const fs::path sim = scratch_dir() / "nc_data.csv";
  REQUIRE(run_cli("simulate --kind dense --p 12 --n 120 --seed 5 -o " + sim.string()) == 0);
  const fs::path nc_out = scratch_dir() / "nc_fit.json";
  const int rc = run_cli("fit -i " + sim.string() + " --rho 0.001 --tol 1e-9 --max-iter 1 -o " +
                         nc_out.string());
  CHECK(rc == 4);
  const json nc = json::parse(read_file(nc_out));
  CHECK(nc["converged"] == false);
}

TEST_CASE("cli fit with calibrated penalty captures most chain edges") {
  const fs::path data = scratch_dir() / "chain_data.csv";
  REQUIRE(run_cli("simulate --kind sparse --p 10 --n 3000 --seed 33 -o " + data.string()) == 0);
  const fs::path out = scratch_dir() / "chain_fit.json";
  REQUIRE(run_cli("fit -i " + data.string() + " --rho-auto 40 -o " + out.string()) == 0);
  const json fit = json::parse(read_file(out));
  int chain_edges = 0;
  for (const auto& e : fit["edges"])
    if (e["j"].get<int>() == e["i"].get<int>() + 1) ++chain_edges;
  CHECK(chain_edges >= 7);  // 9 true chain edges; wide statistical margin
}

TEST_CASE("cli failures print one machine-parsable diagnostic line") {
  const fs::path npd = write_file("npd_diag.csv",
                                  "a,b\n"
                                  "1,2\n"
                                  "2,1\n");
  const fs::path err = scratch_dir() / "diag.err";
  const std::string cmd = std::string(GLASSO_CLI_PATH) + " fit -i " + npd.string() +
                          " --input-kind covariance --rho 0 -o /dev/null 2> " + err.string();
  CHECK(std::system(cmd.c_str()) != 0);
  const std::string text = read_file(err);
  CHECK(text.rfind("error: NotPositiveDefinite: ", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
}

TEST_CASE("cli path and bench emit tables") {
  const fs::path ar_cov = scratch_dir() / "path_data.csv";
  REQUIRE(run_cli("simulate --kind sparse --p 6 --n 300 --seed 12 -o " + ar_cov.string()) == 0);
  const fs::path path_csv = scratch_dir() / "path.csv";
  REQUIRE(run_cli("path -i " + ar_cov.string() + " -f csv -o " + path_csv.string()) == 0);
  const std::string text = read_file(path_csv);
  CHECK(text.rfind("rho,ok,converged,kkt_passed,edges,coef_l1", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 13);  // header + 12 grid rows

  const fs::path bench_csv = scratch_dir() / "bench.csv";
  REQUIRE(run_cli("bench --sizes 12 --kinds sparse --methods exact,mb-or --n 100 --seed 2 -o " +
                  bench_csv.string()) == 0);
  const std::string btext = read_file(bench_csv);
  CHECK(btext.rfind("kind,p,n,seed,method,", 0) == 0);
  CHECK(std::count(btext.begin(), btext.end(), '\n') == 3);  // header + 2 method rows
}
