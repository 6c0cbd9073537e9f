#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hysync/integrator.hpp"
#include "hysync/lyapunov.hpp"
#include "hysync/scenario_io.hpp"
#include "support.hpp"

using namespace hysync;

namespace {
const double kDelta = kPi / 4;
}

TEST_SUITE("lyapunov") {

TEST_CASE("V on reference states") {
  const auto g = counterexample_graph();
  HybridState x;
  x.theta = Eigen::Vector3d(-2 * kPi / 3, 0.0, 2 * kPi / 3);
  x.q = Eigen::Vector3i(0, 0, 1);
  CHECK(lyapunov_V(x, g, CouplingSpec::sign(3 * kPi / 4)) == doctest::Approx(kTwoPi));

  HybridState y;
  y.theta = Eigen::Vector2d(0.0, kPi + kDelta);
  y.q = VectorXi::Zero(1);
  CHECK(lyapunov_V(y, OrientedTree::path(2), CouplingSpec::ramp(kDelta)) == doctest::Approx((kPi + kDelta) / 2));

  HybridState s;
  s.theta = VectorXd::Constant(4, 0.9);
  s.q = VectorXi::Zero(3);
  CHECK(lyapunov_V(s, OrientedTree::path(4), CouplingSpec::sign(kDelta)) == 0.0);
}

TEST_CASE("V vanishes only on the synchronization set and is bounded by v_bar") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-(kPi + kDelta), kPi + kDelta);
  const auto spec = CouplingSpec::sine_plus_ramp(kDelta);
  const auto tree = OrientedTree::path(5);
  const double bound = v_bar(tree, spec);
  for (int k = 0; k < 500; ++k) {
    VectorXd mis(4);
    for (int l = 0; l < 4; ++l) mis(l) = u(rng);
    const double v = lyapunov_V(mis, spec);
    CHECK(v > 0.0);
    CHECK(v <= bound + 1e-12);
  }
  CHECK(lyapunov_V(VectorXd::Zero(4), spec) == 0.0);
}

TEST_CASE("derived constants") {
  CHECK(v_bar(OrientedTree::path(10), CouplingSpec::sign(kDelta)) == doctest::Approx(45 * kPi / 4));
  CHECK(v_bar(OrientedTree::path(2), CouplingSpec::ramp(kDelta)) == doctest::Approx((kPi + kDelta) / 2));
  CHECK(omega_bar(10, -1, 1) == 18.0);
  CHECK(omega_bar(7, 2.5, 2.5) == 0.0);
  CHECK(omega_bar(2, 0, 3) == 3.0);
  CHECK(kappa_star(1, 4, 1, 1.0).value() == 8.0);
  CHECK(kappa_star(1, 0, 1, 1.0).value() == 0.0);
  CHECK(kappa_star(1, 18, 1, 1.0).value() == 36.0);
  CHECK_FALSE(kappa_star(1, 18, 1, std::nullopt).has_value());

  CHECK(finite_time_bound(2, 1, 1, 1).T == 1.0);
  CHECK(finite_time_bound(4, 1, 1, 1).T == 0.5);
  const auto weak = finite_time_bound(1, 1, 1, 1, 8.0);
  CHECK_FALSE(weak.guaranteed);
  CHECK_FALSE(weak.warning.empty());
  CHECK(finite_time_bound(9, 1, 1, 1, 8.0).guaranteed);
}

TEST_CASE("scenario constants of the first-order grid") {
  const auto sc = load_scenario(test::scenario_dir() / "grid1.toml");
  const auto k = scenario_constants(sc);
  const double lambda = 2.0 - 2.0 * std::cos(kPi / 10);
  CHECK(k.c == 1.0);
  CHECK(k.mu.value() == 1.0);
  CHECK(k.lambda_min == doctest::Approx(lambda));
  CHECK(k.v_bar == doctest::Approx(45 * kPi / 4));
  CHECK(k.omega_bar == doctest::Approx(9 * (k.omega_range.hi - k.omega_range.lo)));
  REQUIRE(k.bound.has_value());
  CHECK(k.bound->T == doctest::Approx((45 * kPi / 2) / (sc.kappa * lambda)));
}

TEST_CASE("audit of the stationary counterexample") {
  auto sc = counterexample_scenario(1.0, CouplingSpec::sign(3 * kPi / 4));
  const auto trace = simulate(sc);
  const auto r = audit_trace(trace, sc, sc.integrator);
  CHECK(r.num_jumps == 0);
  CHECK(r.V_constant);
  CHECK(r.initial_V == doctest::Approx(kTwoPi));
  CHECK_FALSE(r.converged());
  CHECK(r.passed());
}

TEST_CASE("audit of a uniform-frequency run") {
  const auto sc = load_scenario(test::scenario_dir() / "uniform_drift.toml");
  const auto trace = simulate(sc);
  const auto r = audit_trace(trace, sc, sc.integrator);
  CHECK(r.num_jumps > 0);
  CHECK(r.flow_violations.empty());
  CHECK(r.max_jump_defect <= 1e-10);
  CHECK(r.passed());
}

TEST_CASE("jump defects on a run with unwinds") {
  const auto sc = load_scenario(test::scenario_dir() / "star_sine.toml");
  const auto trace = simulate(sc);
  const auto r = audit_trace(trace, sc, sc.integrator);
  REQUIRE(r.jump_defects.size() == r.jump_kinds.size());
  int edges = 0;
  for (std::size_t k = 0; k < r.jump_defects.size(); ++k) {
    if (r.jump_kinds[k] == JumpKind::EdgeUnwind) {
      ++edges;
      CHECK(r.jump_defects[k] < 0.0);
    } else {
      CHECK(std::abs(r.jump_defects[k]) <= 1e-10);
    }
  }
  CHECK(edges > 0);
  CHECK(r.wrap_defect_count == 0);
  CHECK(r.edge_nondecrease_count == 0);
}

TEST_CASE("report formats") {
  const auto sc = load_scenario(test::scenario_dir() / "two_node_ramp.toml");
  const auto r = audit_trace(simulate(sc), sc, sc.integrator);
  CHECK(r.to_text().find("reach_time: ") != std::string::npos);
  const auto header = LyapunovReport::summary_header();
  const auto row = r.summary_row();
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(header.rfind("scenario,kappa,sigma,lambda_min,omega_bar,kappa_star,T,reach_time", 0) == 0);

  SolutionTrace wrong;
  wrong.num_nodes = 3;
  CHECK_THROWS_AS(audit_trace(wrong, sc, sc.integrator), std::invalid_argument);
}

}
