#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_commands.hpp"
#include "support.hpp"

using namespace hysync;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hysync");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hysync_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string scenario(const std::string& name) { return (test::scenario_dir() / name).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run writes trace, audit and summary") {
  const auto dir = fresh_dir("run");
  const auto r = invoke({"run", "--scenario", scenario("two_node_ramp.toml"), "--out", dir.string(), "--radial"});
  CHECK(r.code == cli::kOk);
  int traces = 0, audits = 0, radials = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    traces += n.ends_with(".trace.csv");
    audits += n.ends_with(".audit.txt");
    radials += n.ends_with(".radial.csv");
  }
  CHECK(traces == 1);
  CHECK(audits == 1);
  CHECK(radials == 1);
  const auto results = slurp(dir / "results.csv");
  CHECK(std::count(results.begin(), results.end(), '\n') == 2);
  fs::remove_all(dir);
}

TEST_CASE("counterexample run reports non-convergence") {
  const auto dir = fresh_dir("ce");
  const auto r = invoke({"run", "--scenario", scenario("counterexample.toml"), "--out", dir.string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("V_constant: yes") != std::string::npos);
  CHECK(r.out.find("no synchronization") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("no-coupling run reports non-synchronization") {
  const auto dir = fresh_dir("nc");
  const auto r = invoke({"run", "--scenario", scenario("grid1.toml"), "--no-coupling", "--t-end", "2", "--out",
                      dir.string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("no synchronization") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("reruns are byte-identical") {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  const auto args = [&](const fs::path& d) {
    return std::vector<std::string>{"run", "--scenario", scenario("grid1.toml"), "--t-end", "1", "--seed", "3",
                                    "--out", d.string()};
  };
  REQUIRE(invoke(args(a)).code == cli::kOk);
  REQUIRE(invoke(args(b)).code == cli::kOk);
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() == ".csv" && e.path().filename() != "results.csv")
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("audit subcommand re-reads a trace") {
  const auto dir = fresh_dir("audit");
  REQUIRE(invoke({"run", "--scenario", scenario("uniform_drift.toml"), "--out", dir.string()}).code == cli::kOk);
  fs::path trace;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().string().ends_with(".trace.csv")) trace = e.path();
  const auto r = invoke({"audit", "--scenario", scenario("uniform_drift.toml"), "--trace", trace.string(), "--out",
                      dir.string()});
  CHECK(r.code == cli::kOk);
  const auto audit = slurp(fs::path(trace.string().substr(0, trace.string().size() - 10) + ".audit.txt"));
  CHECK(r.out.find(audit.substr(0, audit.find('\n'))) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("validate exit codes") {
  auto r = invoke({"validate", scenario("couplings/sine.toml")});
  CHECK(r.code == cli::kValidationFailure);
  CHECK(r.out.find("status: fail") != std::string::npos);

  r = invoke({"validate", scenario("couplings/sign.toml")});
  CHECK(r.code == cli::kOk);

  r = invoke({"validate", scenario("graphs/path10.toml")});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("lambda_min: 0.0978") != std::string::npos);

  r = invoke({"validate", scenario("graphs/cycle3.toml")});
  CHECK(r.code == cli::kValidationFailure);
  CHECK(r.out.find("tree: no") != std::string::npos);
  CHECK(r.out.find("singular") != std::string::npos);
}

TEST_CASE("usage and validation errors") {
  CHECK(invoke({}).code == cli::kUsage);
  CHECK(invoke({"run", "--scenario", scenario("missing.toml")}).code == cli::kUsage);
  CHECK(invoke({"run", "--scenario", scenario("grid1.toml"), "--bogus"}).code == cli::kUsage);
  CHECK(invoke({"run", "--scenario", scenario("grid1.toml"), "--step", "-1", "--out",
             fresh_dir("neg").string()}).code == cli::kValidationFailure);
  CHECK(invoke({"run", "--scenario", scenario("grid1.toml"), "--delta", "4", "--out", fresh_dir("d").string()}).code ==
        cli::kValidationFailure);
}

TEST_CASE("empty sweep is a no-op") {
  const auto r = invoke({"sweep", "--scenario", scenario("grid1.toml"), "--out", fresh_dir("empty").string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("nothing to run") != std::string::npos);
}

TEST_CASE("ramp sweep is monotone in kappa") {
  const auto dir = fresh_dir("sweep");
  const auto r = invoke({"sweep", "--scenario", scenario("grid1.toml"), "--sigmas", "ramp", "--kappas", "45,90,181",
                      "--out", dir.string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("trend[ramp]: steady-state mismatch nonincreasing in kappa") != std::string::npos);
  const auto csv = slurp(dir / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  fs::remove_all(dir);
}

TEST_CASE("only the gain above kappa star certifies") {
  const auto dir = fresh_dir("kstar");
  const auto r = invoke({"sweep", "--scenario", scenario("grid1.toml"), "--sigmas", "sign", "--kappas",
                      "0.5kstar,2kstar", "--sliding", "eqctl", "--step", "1e-6", "--t-end", "0.01", "--out",
                      dir.string()});
  CHECK(r.code == cli::kOk);
  const auto line_start = r.out.find("certified[sign]:");
  REQUIRE(line_start != std::string::npos);
  const auto line = r.out.substr(line_start, r.out.find('\n', line_start) - line_start);
  CHECK(std::count(line.begin(), line.end(), '=') == 1);
  const auto csv = slurp(dir / "sweep.csv");
  std::istringstream rows(csv);
  std::string header, first, second;
  std::getline(rows, header);
  std::getline(rows, first);
  std::getline(rows, second);
  auto certified = [](const std::string& row) {
    std::vector<std::string> cells;
    std::stringstream ss(row);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    return cells.at(5);
  };
  CHECK(certified(first) == "0");
  CHECK(certified(second) == "1");
  fs::remove_all(dir);
}

}
