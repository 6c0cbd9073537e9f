#include <doctest.h>

#include <cmath>

#include "hysync/integrator.hpp"
#include "hysync/scenario_io.hpp"
#include "support.hpp"

using namespace hysync;

namespace {

const double kDelta = kPi / 4;
const double kL = kPi + kDelta;

HybridState pair_state(double a, double b, int q = 0) {
  HybridState x;
  x.theta = VectorXd(2);
  x.theta << a, b;
  x.q = VectorXi::Constant(1, q);
  return x;
}

ScenarioConfig two_node(CouplingSpec coupling, double kappa, VectorXd omega, HybridState x0, double t_end) {
  ScenarioConfig sc;
  sc.id = "two_node";
  sc.graph = OrientedTree::path(2);
  sc.coupling = std::move(coupling);
  sc.kappa = kappa;
  sc.constant_omega = std::move(omega);
  sc.initial = std::move(x0);
  sc.integrator.t_end = t_end;
  return sc;
}

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("boundary detection on a linear step") {
  const auto g = OrientedTree::path(2);
  auto hit = detect_boundary(pair_state(kL - 0.01, kL - 0.02), pair_state(kL + 0.02, kL - 0.02), g, kDelta, 1e-12);
  REQUIRE(hit.has_value());
  CHECK(hit->kind == JumpKind::PhaseWrap);
  CHECK(hit->index == 0);
  CHECK(std::abs(hit->fraction - 1.0 / 3.0) <= 1e-10);

  CHECK_FALSE(detect_boundary(pair_state(0.0, 0.1), pair_state(0.2, 0.3), g, kDelta, 1e-12).has_value());

  hit = detect_boundary(pair_state(0.0, kL - 0.1), pair_state(0.0, kL + 0.1), g, kDelta, 1e-12);
  REQUIRE(hit.has_value());
  CHECK(hit->kind == JumpKind::EdgeUnwind);
  CHECK(hit->index == 0);
  CHECK(hit->fraction == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("equivalent control on the synchronization set") {
  auto sc = two_node(CouplingSpec::sign(kDelta), 2.0, vec2(0.0, 2.0), pair_state(0.1, 0.1), 1.0);
  sc.integrator.sliding = SlidingMode::EquivalentControl;
  CHECK(equivalent_coupling(sc.graph, 2.0, vec2(0.0, 2.0))(0) == doctest::Approx(0.5));
  auto d = sliding_step(sc.initial, 0.0, sc, sc.integrator);
  REQUIRE(d.has_value());
  CHECK((*d)(0) == doctest::Approx(1.0));
  CHECK((*d)(1) == doctest::Approx(1.0));

  sc.kappa = 0.5;
  CHECK_FALSE(sliding_step(sc.initial, 0.0, sc, sc.integrator).has_value());

  sc.kappa = 1.0;
  sc.constant_omega = vec2(0.7, 0.7);
  d = sliding_step(sc.initial, 0.0, sc, sc.integrator);
  REQUIRE(d.has_value());
  CHECK(d->isApprox(vec2(0.7, 0.7)));

  sc.integrator.sliding = SlidingMode::Chatter;
  CHECK_THROWS_AS(sliding_step(sc.initial, 0.0, sc, sc.integrator), IntegratorError);
  sc.integrator.sliding = SlidingMode::EquivalentControl;
  CHECK_THROWS_AS(sliding_step(pair_state(0.0, 0.5), 0.0, sc, sc.integrator), IntegratorError);
}

TEST_CASE("stationary counterexample") {
  const auto sc = counterexample_scenario();
  const auto trace = simulate(sc);
  CHECK(trace.jump_events.empty());
  for (const auto& s : trace.samples) CHECK(std::abs(s.mismatch_inf - 2 * kPi / 3) <= 1e-9);
  CHECK(trace.samples.back().t == doctest::Approx(sc.integrator.t_end));
  const auto env = dwell_stats(trace);
  CHECK(std::isinf(env.tau_d));
  CHECK(env.j0 == 0.0);
  CHECK(env.holds);
}

TEST_CASE("two node ramp against the closed form") {
  const double kappa = 1.0;
  const auto sc = two_node(CouplingSpec::ramp(kDelta), kappa, vec2(0.0, 0.0), pair_state(0.0, 1.0), 10.0);
  const auto trace = simulate(sc);
  CHECK(trace.jump_events.empty());
  double prev = 2.0;
  for (const auto& s : trace.samples) {
    CHECK(s.mismatch_inf < prev);
    prev = s.mismatch_inf;
    CHECK(std::abs(s.mismatch_inf - std::exp(-2.0 * kappa * s.t / kL)) <= 1e-10);
  }
}

TEST_CASE("fourth order convergence on a smooth run") {
  auto error_at = [](double h) {
    auto sc = two_node(CouplingSpec::ramp(kDelta), 4.0, vec2(0.0, 0.0), pair_state(0.0, 1.0), 2.0);
    sc.integrator.step_h = h;
    sc.integrator.event_tol = 1e-12;
    const auto trace = simulate(sc);
    return std::abs(trace.samples.back().mismatch_inf - std::exp(-2.0 * 4.0 * 2.0 / kL));
  };
  const double coarse = error_at(0.1);
  const double fine = error_at(0.05);
  CHECK(coarse / fine > 12.0);
  CHECK(coarse / fine < 20.0);
}

TEST_CASE("uniform drift wraps every two pi") {
  auto sc = two_node(CouplingSpec::ramp(kDelta), 1.0, vec2(1.0, 1.0), pair_state(0.0, 0.0), 20.0);
  const auto trace = simulate(sc);
  REQUIRE(trace.jump_events.size() == 6);
  for (std::size_t k = 0; k < trace.jump_events.size(); ++k) {
    const auto& ev = trace.jump_events[k];
    CHECK(ev.kind == JumpKind::PhaseWrap);
    CHECK(ev.post.front().theta(ev.index) == doctest::Approx(-kPi + kDelta));
    CHECK(std::abs(ev.t - (kL + kTwoPi * static_cast<double>(k / 2))) <= 1e-8);
  }
  for (const auto& s : trace.samples) CHECK(s.mismatch_inf <= 1e-12);
  CHECK(trace.dwell.jump_count == 6);
  CHECK(trace.dwell.max_burst == 2);
  const auto env = dwell_stats(trace);
  CHECK(env.holds);
  CHECK(env.j0 == 2.0);
  CHECK(env.tau_d == doctest::Approx(kPi).epsilon(1e-6));
}

TEST_CASE("hybrid time domain and containment") {
  const auto sc = load_scenario(test::scenario_dir() / "star_sine.toml");
  const auto trace = simulate(sc);
  REQUIRE_FALSE(trace.samples.empty());
  CHECK(trace.samples.front().t == 0.0);
  CHECK(trace.samples.front().j == 0);
  const double L = kPi + sc.delta();
  for (std::size_t k = 1; k < trace.samples.size(); ++k) {
    const auto& a = trace.samples[k - 1];
    const auto& b = trace.samples[k];
    CHECK(b.t >= a.t);
    if (b.event.empty()) {
      CHECK(b.j == a.j);
      CHECK(b.t > a.t);
    } else {
      CHECK(b.j == a.j + 1);
      CHECK(b.t == a.t);
    }
    CHECK(b.x.theta.cwiseAbs().maxCoeff() <= L + sc.integrator.event_tol);
  }
  for (const auto& ev : trace.jump_events) {
    const auto& post = ev.post.front();
    const VectorXd mis = mismatch_vector(post, sc.graph);
    if (ev.kind == JumpKind::EdgeUnwind) CHECK(std::abs(mis(ev.index)) < L);
    else CHECK(std::abs(std::abs(post.theta(ev.index)) - (kPi - sc.delta())) <= 1e-12);
  }
  CHECK(dwell_stats(trace).holds);
}

TEST_CASE("equivalent control holds the mismatch at zero") {
  auto sc = two_node(CouplingSpec::sign(kDelta), 2.0, vec2(0.0, 2.0), pair_state(0.0, 0.5), 2.0);
  sc.integrator.sliding = SlidingMode::EquivalentControl;
  sc.integrator.step_h = 1e-3;
  const auto trace = simulate(sc);
  CHECK(trace.sliding_entries >= 1);
  bool reached = false;
  for (const auto& s : trace.samples) {
    if (s.mismatch_inf <= 1e-9) reached = true;
    if (reached) CHECK(s.mismatch_inf <= 1e-9);
  }
  CHECK(reached);
  CHECK(trace.samples.back().x.theta(0) == doctest::Approx(trace.samples.back().x.theta(1)));
}

TEST_CASE("diagnostics") {
  auto sc = two_node(CouplingSpec::ramp(kDelta), 1.0, vec2(1.0, 1.0), pair_state(0.0, 0.0), 20.0);
  sc.integrator.max_jumps = 3;
  try {
    simulate(sc);
    FAIL("max_jumps not enforced");
  } catch (const IntegratorError& e) {
    CHECK(e.kind() == IntegratorError::Kind::MaxJumps);
  }
  sc.integrator.max_jumps = 100;
  sc.initial.theta = VectorXd::Zero(3);
  CHECK_THROWS_AS(simulate(sc), std::exception);

  IntegratorConfig cfg;
  cfg.event_tol = cfg.step_h;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.record_every = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("chatter tolerance and sample thinning") {
  CHECK(chatter_tolerance(2.0, 1.0, 4, 1e-3) == doctest::Approx(8e-3));
  auto sc = two_node(CouplingSpec::ramp(kDelta), 1.0, vec2(0.0, 0.0), pair_state(0.0, 1.0), 1.0);
  const auto full = simulate(sc);
  sc.integrator.record_every = 10;
  const auto thin = simulate(sc);
  CHECK(thin.samples.size() < full.samples.size() / 5);
  CHECK(thin.samples.back().t == doctest::Approx(1.0));
}

}
