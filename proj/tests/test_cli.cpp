#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "zetaflow/zetaflow.hpp"

namespace fs = std::filesystem;
using namespace zetaflow;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("zetaflow_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
  static int serial = 0;
  const fs::path out = work_dir() / ("out" + std::to_string(serial));
  const fs::path err = work_dir() / ("err" + std::to_string(serial));
  ++serial;
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += std::string(ZETAFLOW_CLI_PATH) + " " + args + " >" + out.string() +
         " 2>" + err.string();
  const int rc = std::system(cmd.c_str());
  CliResult res;
  res.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  res.out = slurp(out);
  res.err = slurp(err);
  return res;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

std::vector<double> numbers_of(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  double v;
  while (ss >> v) out.push_back(v);
  return out;
}

std::vector<double> csv_fields(const std::string& row) {
  std::vector<double> out;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(cell.empty() ? std::nan("") : std::stod(cell));
  return out;
}

}  // namespace

TEST_CASE("eval command") {
  const CliResult basic = run_cli("eval --s 2+0i --alpha 1");
  REQUIRE(basic.code == 0);
  const auto vals = numbers_of(basic.out);
  REQUIRE(vals.size() == 3);
  CHECK(std::abs(vals[0] - std::numbers::pi * std::numbers::pi / 6.0) <
        1e-12);
  CHECK(std::abs(vals[1]) < 1e-13);
  CHECK(vals[2] > 0.0);
  CHECK(vals[2] < 1e-11);

  const CliResult pole = run_cli("eval --s 1+0i --alpha 1");
  CHECK(pole.code == 3);
  CHECK(pole.out.empty());
  CHECK(pole.err.find("error:") == 0);

  const ComplexPoint s{2.0, 1.0};
  const CliResult deriv = run_cli("eval --s 2+1i --alpha 0.7 --deriv alpha");
  REQUIRE(deriv.code == 0);
  const auto dv = numbers_of(deriv.out);
  REQUIRE(dv.size() == 3);
  const ComplexPoint want = -s * hurwitz_zeta(s + 1.0, 0.7).value;
  CHECK(std::abs(ComplexPoint{dv[0], dv[1]} - want) < 1e-10);

  CHECK(run_cli("eval --s \"2+ 0i\" --alpha 1").code == 2);
  CHECK(run_cli("eval --s 2+0i").code == 2);
  CHECK(run_cli("eval --s 2+0i --alpha 0.5 --deriv bogus").code == 2);
}

TEST_CASE("eval with a family spec file") {
  const fs::path spec_path = work_dir() / "odd.json";
  {
    std::ofstream out(spec_path);
    out << to_json(build_psi5_odd({0.0, 1.0})).dump(2) << '\n';
  }
  const CliResult res =
      run_cli("eval --s 0.5+7i --family-spec " + spec_path.string());
  REQUIRE(res.code == 0);
  const auto vals = numbers_of(res.out);
  REQUIRE(vals.size() == 3);
  const ComplexPoint want =
      evaluate_combination(build_psi5_odd({0.0, 1.0}), {0.5, 7.0}).value;
  CHECK(std::abs(ComplexPoint{vals[0], vals[1]} - want) < 1e-10);

  CHECK(run_cli("eval --s 2+0i --alpha 1 --family-spec " + spec_path.string())
            .code == 2);
  CHECK(run_cli("eval --s 2+0i --family-spec /nonexistent.json").code == 2);
}

TEST_CASE("scan command") {
  const fs::path csv1 = work_dir() / "scan1.csv";
  const fs::path csv2 = work_dir() / "scan2.csv";
  const CliResult res = run_cli("scan --rect -1,2,0.0001,30 --alpha 1 --out " +
                                csv1.string());
  REQUIRE(res.code == 0);
  CHECK(res.out == "3 3\n");
  const auto rows = lines_of(slurp(csv1));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "sigma,t,multiplicity,residual");
  const auto first = csv_fields(rows[1]);
  REQUIRE(first.size() == 4);
  CHECK(std::abs(first[0] - 0.5) < 1e-9);
  CHECK(std::abs(first[1] - 14.134725141734693) < 1e-6);
  CHECK(first[2] == 1.0);

  const CliResult rerun = run_cli(
      "scan --rect -1,2,0.0001,30 --alpha 1 --out " + csv2.string());
  REQUIRE(rerun.code == 0);
  CHECK(slurp(csv1) == slurp(csv2));  // byte-identical artifacts

  CHECK(run_cli("scan --rect 1,1,0,30 --alpha 1").code == 2);
  CHECK(run_cli("scan --rect 1,2,0,30,40 --alpha 1").code == 2);
  CHECK(run_cli("scan --rect -1,2,1,30").code == 2);
}

TEST_CASE("count command") {
  const CliResult res = run_cli("count --alpha 1 --tmax 100");
  REQUIRE(res.code == 0);
  CHECK(res.out.find("predicted=28.1273") != std::string::npos);
  CHECK(res.out.find("actual=29") != std::string::npos);
  CHECK(res.out.find("deviation=-0.87") != std::string::npos);

  CHECK(run_cli("count --alpha 1e-11 --tmax 50").code == 2);
  CHECK(run_cli("count --alpha 0.5 --tmax 600").code == 2);
  CHECK(run_cli("count --alpha 0.5 --tmax 0").code == 2);

  const CliResult sweep = run_cli("count --alpha 0.5 --tmax 30 --sweep");
  REQUIRE(sweep.code == 0);
  const auto rows = lines_of(sweep.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "tmax,predicted,actual,deviation");
  CHECK(rows[3].find("30,") == 0);
  CHECK(rows[3].find(",6,") != std::string::npos);
}

TEST_CASE("nullspace command") {
  const CliResult seven = run_cli("nullspace --p 7");
  REQUIRE(seven.code == 0);
  CHECK(seven.out == "p=7 order=3 rank=2 nullity=1 p-4r=-1\n");

  CHECK(run_cli("nullspace --p 8").code == 2);
  CHECK(run_cli("nullspace").code == 2);

  const CliResult table = run_cli("nullspace --primes-up-to 50");
  REQUIRE(table.code == 0);
  const auto rows = lines_of(table.out);
  CHECK(rows.size() == 13);  // primes 5..47
  for (const auto& row : rows) {
    const auto tail = row.find("p-4r=");
    REQUIRE(tail != std::string::npos);
    const int defect = std::stoi(row.substr(tail + 5));
    CHECK(std::abs(defect) == 1);
  }

  const CliResult basis = run_cli("nullspace --p 5 --basis");
  REQUIRE(basis.code == 0);
  const auto rows5 = lines_of(basis.out);
  REQUIRE(rows5.size() == 2);
  REQUIRE(rows5[1].rfind("x ", 0) == 0);
  const auto comps = numbers_of(rows5[1].substr(2));
  REQUIRE(comps.size() == 2);
  CHECK(std::abs(comps[1] / comps[0] - golden_ratio()) < 1e-10);
}

TEST_CASE("track command") {
  const fs::path csv1 = work_dir() / "track1.csv";
  const fs::path csv2 = work_dir() / "track2.csv";
  const fs::path svg1 = work_dir() / "track1.svg";
  const fs::path svg2 = work_dir() / "track2.svg";
  const std::string common =
      "track --family psie5 --from 0 --to 0.3 --window 1,6 ";
  const CliResult res =
      run_cli(common + "--out " + csv1.string() + " --svg " + svg1.string());
  REQUIRE(res.code == 0);
  CHECK(res.out == "tracked=2 lost=0\n");
  const auto rows = lines_of(slurp(csv1));
  REQUIRE(rows.size() > 10);
  CHECK(rows[0] == "zero_id,param,sigma,t,residual,scaled_t,event_flag");
  const auto first = csv_fields(rows[1]);
  REQUIRE(first.size() == 7);
  CHECK(first[0] == 0.0);
  CHECK(first[1] == 0.0);
  CHECK(std::abs(first[2] - 0.5) < 1e-9);
  CHECK(std::abs(first[3] - std::numbers::pi / std::log(5.0)) < 1e-6);

  const fs::path sidecar = work_dir() / "track1.events.json";
  REQUIRE(fs::exists(sidecar));
  const auto events = nlohmann::json::parse(slurp(sidecar));
  CHECK(events.is_array());

  const CliResult rerun =
      run_cli(common + "--out " + csv2.string() + " --svg " + svg2.string());
  REQUIRE(rerun.code == 0);
  CHECK(slurp(csv1) == slurp(csv2));
  CHECK(slurp(svg1) == slurp(svg2));
  CHECK(slurp(svg1).find("<svg") != std::string::npos);
  CHECK(slurp(svg1).find("polyline") != std::string::npos);

  CHECK(run_cli("track --family hurwitz --from 1 --to 0.99").code == 2);
  CHECK(run_cli("track --family bogus").code == 2);
  CHECK(run_cli("track --family hurwitz --from 2 --to 0.5 --zeros 1").code ==
        2);
}

TEST_CASE("tolerance override") {
  CHECK(run_cli("eval --s 2+0i --alpha 1", "ZETAFLOW_TOL=1e-10").code == 0);
  CHECK(run_cli("eval --s 2+0i --alpha 1", "ZETAFLOW_TOL=abc").code == 2);
  CHECK(run_cli("eval --s 2+0i --alpha 1", "ZETAFLOW_TOL=-1").code == 2);
}

TEST_CASE("argument surface") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("eval --s 2+0i --alpha 1 --nope").code == 2);
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("frobnicate").code == 2);
}
