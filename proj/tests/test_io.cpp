#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hysync/integrator.hpp"
#include "hysync/lyapunov.hpp"
#include "hysync/scenario_io.hpp"
#include "hysync/trace_io.hpp"
#include "support.hpp"

using namespace hysync;
namespace fs = std::filesystem;

namespace {

std::string csv_of(const SolutionTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

const char* kShipped[] = {"grid1.toml", "grid2.toml", "counterexample.toml", "uniform_drift.toml",
                          "two_node_ramp.toml", "star_sine.toml"};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("trace header") {
  auto sc = load_scenario(test::scenario_dir() / "two_node_ramp.toml");
  sc.integrator.t_end = 0.01;
  const auto text = csv_of(simulate(sc));
  CHECK(text.rfind("t,j,theta_1,theta_2,q_1,V,mismatch_inf,event\n", 0) == 0);
}

TEST_CASE("trace round trip re-audits identically") {
  const auto sc = load_scenario(test::scenario_dir() / "star_sine.toml");
  const auto trace = simulate(sc);
  std::istringstream is(csv_of(trace));
  const auto back = read_trace_csv(is, &sc.graph);
  REQUIRE(back.samples.size() == trace.samples.size());
  REQUIRE(back.jump_events.size() == trace.jump_events.size());
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    CHECK(back.samples[k].t == trace.samples[k].t);
    CHECK(back.samples[k].j == trace.samples[k].j);
    CHECK(back.samples[k].x.theta == trace.samples[k].x.theta);
    CHECK(back.samples[k].x.q == trace.samples[k].x.q);
    CHECK(back.samples[k].event == trace.samples[k].event);
  }
  for (std::size_t k = 0; k < trace.jump_events.size(); ++k) {
    CHECK(back.jump_events[k].kind == trace.jump_events[k].kind);
    CHECK(back.jump_events[k].index == trace.jump_events[k].index);
  }
  const auto a = audit_trace(trace, sc, sc.integrator);
  const auto b = audit_trace(back, sc, sc.integrator);
  CHECK(a.to_text() == b.to_text());
  CHECK(std::abs(a.final_V - b.final_V) <= 1e-12);
}

TEST_CASE("deterministic reruns") {
  auto sc = load_scenario(test::scenario_dir() / "grid1.toml");
  sc.integrator.t_end = 1.0;
  CHECK(csv_of(simulate(sc)) == csv_of(simulate(sc)));
}

TEST_CASE("radial plot data") {
  CHECK(radial_r(0.0) == doctest::Approx(1.0 / 0.66));
  CHECK(radial_r(4.0) == doctest::Approx(1.0 / (1.55 * 2.0 + 0.66)));
  auto sc = load_scenario(test::scenario_dir() / "uniform_drift.toml");
  const auto trace = simulate(sc);
  std::ostringstream os;
  write_radial_csv(os, trace);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,r,x_1,y_1,x_2,y_2");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == trace.samples.size() - trace.jump_events.size());
}

TEST_CASE("malformed trace input") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_trace_csv(empty), TraceIoError);
  std::istringstream bad("t,j,theta_1,V,mismatch_inf,event\n0,0,abc,0,0,\n");
  CHECK_THROWS_AS(read_trace_csv(bad), TraceIoError);
}

TEST_CASE("scenario files round trip") {
  for (const char* name : kShipped) {
    CAPTURE(name);
    const auto a = load_scenario(test::scenario_dir() / name);
    const auto text = dump_scenario(a);
    const auto b = parse_scenario(text, name, test::scenario_dir());
    CHECK(dump_scenario(b) == text);
    CHECK(a.graph == b.graph);
    CHECK(a.coupling == b.coupling);
    CHECK(a.kappa == b.kappa);
    CHECK(a.initial == b.initial);
    CHECK(a.integrator == b.integrator);
    CHECK(a.seed == b.seed);
  }
  const fs::path tmp = fs::temp_directory_path() / "hysync_io_roundtrip.toml";
  const auto g = load_scenario(test::scenario_dir() / "grid2.toml");
  save_scenario(tmp, g);
  const auto h = load_scenario(tmp);
  CHECK(h.initial == g.initial);
  CHECK(h.params->omega_tilde == g.params->omega_tilde);
  fs::remove(tmp);
}

TEST_CASE("angles") {
  CHECK(parse_angle("pi") == doctest::Approx(kPi));
  CHECK(parse_angle("pi/4") == doctest::Approx(kPi / 4));
  CHECK(parse_angle("3pi/4") == doctest::Approx(3 * kPi / 4));
  CHECK(parse_angle("3*pi/4") == doctest::Approx(3 * kPi / 4));
  CHECK(parse_angle("-pi/2") == doctest::Approx(-kPi / 2));
  CHECK(parse_angle("576pi/10") == doctest::Approx(576 * kPi / 10));
  CHECK(parse_angle("0.25") == 0.25);
  CHECK_THROWS(parse_angle("tau"));
}

TEST_CASE("parse errors carry a location") {
  const char* text = "id = \"x\"\nnodes = 2\nedges = [[1, 2]]\nomega = [0.0, 0.0]\nbogus = 1\n";
  try {
    parse_scenario(text, "bad.toml");
    FAIL("unknown key accepted");
  } catch (const ScenarioIoError& e) {
    CHECK(std::string(e.what()).rfind("bad.toml:5:", 0) == 0);
  }
  CHECK_THROWS_AS(parse_scenario("nodes = [", "broken.toml"), ScenarioIoError);
  CHECK_THROWS_AS(parse_scenario("nodes = 3\nedges = [[1, 2], [2, 3], [3, 1]]\nomega = [0, 0, 0]\n"
                                 "[initial]\ntheta = [0, 0, 0]\nq = [0, 0]\n",
                                 "q.toml"),
                  ScenarioError);
}

TEST_CASE("spec files") {
  const auto sine = load_spec_file(test::scenario_dir() / "couplings" / "sine.toml");
  REQUIRE(sine.coupling.has_value());
  CHECK(sine.coupling->family() == SigmaFamily::Table);
  CHECK_FALSE(validate_property1(*sine.coupling, 10000).passed());

  const auto path = load_spec_file(test::scenario_dir() / "graphs" / "path10.toml");
  REQUIRE(path.graph.has_value());
  CHECK(path.graph->is_tree());
  CHECK_FALSE(path.tree_error.has_value());

  const auto cycle = load_spec_file(test::scenario_dir() / "graphs" / "cycle3.toml");
  REQUIRE(cycle.graph.has_value());
  CHECK(cycle.tree_error.has_value());
  CHECK(cycle.graph->num_edges() == 3);

  const auto raw = load_spec_file(test::scenario_dir() / "couplings" / "sine_table.txt");
  REQUIRE(raw.coupling.has_value());
  CHECK(raw.coupling->table_values().size() == 201);
}

}
