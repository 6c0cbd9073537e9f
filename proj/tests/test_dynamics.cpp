#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hysync/dynamics.hpp"
#include "support.hpp"

using namespace hysync;

namespace {

const double kDelta = kPi / 4;

HybridState state(std::initializer_list<double> theta, std::initializer_list<int> q) {
  HybridState x;
  x.theta = Eigen::Map<const VectorXd>(theta.begin(), static_cast<Eigen::Index>(theta.size()));
  x.q = Eigen::Map<const VectorXi>(q.begin(), static_cast<Eigen::Index>(q.size()));
  return x;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("mismatch vector") {
  const auto g = counterexample_graph();
  const auto x = state({-2 * kPi / 3, 0.0, 2 * kPi / 3}, {0, 0, 1});
  const VectorXd mis = mismatch_vector(x, g);
  for (int l = 0; l < 3; ++l) CHECK(mis(l) == doctest::Approx(2 * kPi / 3));

  const auto t = OrientedTree::path(2);
  CHECK(mismatch_vector(state({0.0, kPi}, {-1}), t)(0) == doctest::Approx(-kPi));
  CHECK(mismatch_vector(state({0.4, 0.4, 0.4}, {0, 0}), OrientedTree::path(3)).isZero(0.0));
}

TEST_CASE("flow map") {
  const auto g = counterexample_graph();
  const auto x = state({-2 * kPi / 3, 0.0, 2 * kPi / 3}, {0, 0, 1});
  const auto spec_ce = CouplingSpec::ramp(3 * kPi / 4);
  const auto d = flow_map(x, VectorXd::Zero(3), 5.0, g, spec_ce);
  CHECK(d.theta.norm() <= 1e-14);
  CHECK(d.q.isZero(0.0));

  const auto t = OrientedTree::path(3);
  const auto sync = flow_map(state({0.2, 0.2, 0.2}, {0, 0}), VectorXd::Constant(3, 1.5), 3.0, t,
                             CouplingSpec::sign(kDelta));
  CHECK(sync.theta.isApprox(VectorXd::Constant(3, 1.5)));

  const auto two = flow_map(state({0.0, 1.0}, {0}), VectorXd::Zero(2), 1.0, OrientedTree::path(2),
                            CouplingSpec::sign(kDelta));
  CHECK(two.theta(0) == 1.0);
  CHECK(two.theta(1) == -1.0);

  CHECK_THROWS_AS(flow_map(state({-2.0, 2.0}, {0}), VectorXd::Zero(2), 1.0, OrientedTree::path(2),
                           CouplingSpec::sign(kDelta)),
                  FlowSetError);
}

TEST_CASE("edge jump sets and maps") {
  const auto t = OrientedTree::path(2);
  const double L = kPi + kDelta;
  CHECK(in_D_ij(state({0.0, L}, {0}), t, 0, kDelta));
  CHECK_FALSE(in_D_ij(state({0.0, kPi}, {0}), t, 0, kDelta));
  CHECK(in_D_ij(state({kPi / 2 + kDelta, -kPi / 2 - kDelta}, {0}), t, 0, kDelta));

  auto post = jump_G_ij(state({-0.75 * kPi, 0.75 * kPi}, {0}), t, 0, kDelta);
  REQUIRE(post.size() == 1);
  CHECK(post[0].q(0) == -1);
  CHECK(mismatch_vector(post[0], t)(0) == doctest::Approx(-0.5 * kPi));

  post = jump_G_ij(state({0.75 * kPi, -0.75 * kPi}, {0}), t, 0, kDelta);
  REQUIRE(post.size() == 1);
  CHECK(post[0].q(0) == 1);
  CHECK(mismatch_vector(post[0], t)(0) == doctest::Approx(0.5 * kPi));

  post = jump_G_ij(state({-kPi / 2, kPi / 2}, {1}), t, 0, kDelta);
  REQUIRE(post.size() == 2);
  CHECK(post[0].q(0) == -1);
  CHECK(post[1].q(0) == 0);
  CHECK(mismatch_vector(post[0], t)(0) == doctest::Approx(-kPi));
  CHECK(mismatch_vector(post[1], t)(0) == doctest::Approx(kPi));

  CHECK_THROWS_AS(jump_G_ij(state({0.0, 1.0}, {0}), t, 0, kDelta), JumpError);
}

TEST_CASE("phase wrap sets and maps") {
  const double L = kPi + kDelta;
  const auto t = OrientedTree::path(2);
  CHECK(in_D_i(state({L, L - 0.1}, {0}), t, 0, kDelta));
  CHECK_FALSE(in_D_i(state({kPi, 0.0}, {0}), t, 0, kDelta));

  const auto p3 = OrientedTree::path(3);
  CHECK_FALSE(in_D_i(state({-1.0, L, -1.0}, {0, 0}), p3, 1, kDelta));

  auto x = state({0.9 * L, L}, {0});
  auto y = jump_g_i(x, t, 1, kDelta);
  CHECK(y.theta(1) == doctest::Approx(-kPi + kDelta));
  CHECK(y.q(0) == 1);
  CHECK(mismatch_vector(y, t)(0) == doctest::Approx(mismatch_vector(x, t)(0)).epsilon(1e-15));

  x = state({-L, -0.9 * L}, {0});
  y = jump_g_i(x, t, 0, kDelta);
  CHECK(y.theta(0) == doctest::Approx(kPi - kDelta));
  CHECK(y.q(0) == 1);

  CHECK_THROWS_AS(jump_g_i(state({0.0, 0.0}, {0}), t, 0, kDelta), JumpError);
}

TEST_CASE("synchronization set") {
  const auto t = OrientedTree::path(2);
  CHECK(in_A(state({0.3, 0.3}, {0}), t, 0.0));
  CHECK(in_A(state({kPi, -kPi}, {1}), t, 0.0));
  const auto x = state({-2 * kPi / 3, 0.0, 2 * kPi / 3}, {0, 0, 1});
  CHECK_FALSE(in_A(x, counterexample_graph(), 1e-3));
}

TEST_CASE("jumps from the synchronization set stay in it") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double L = kPi + kDelta;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 8;
    const auto tree = OrientedTree::build(n, test::random_tree_edges(n, rng));
    HybridState x;
    x.theta = VectorXd::Constant(n, L);
    x.q = VectorXi::Zero(n - 1);
    const int i = static_cast<int>((u(rng) + 1.0) * 0.5 * (n - 1));
    REQUIRE(in_D_i(x, tree, i, kDelta));
    const auto y = jump_g_i(x, tree, i, kDelta);
    CHECK(in_A(y, tree, 1e-12));
    CHECK(in_X(y, kDelta));
  }
}

TEST_CASE("jump maps commute with relabeling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double L = kPi + kDelta;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 6;
    const auto raw = test::random_tree_edges(n, rng);
    std::vector<int> perm(n);
    for (int k = 0; k < n; ++k) perm[k] = k;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<int, int>> mapped;
    for (auto [a, b] : raw) mapped.emplace_back(perm[a], perm[b]);
    const auto ta = OrientedTree::build(n, raw);
    const auto tb = OrientedTree::build(n, mapped);

    HybridState xa;
    xa.theta = VectorXd::Zero(n);
    xa.q = VectorXi::Zero(n - 1);
    const int wrap = trial % n;
    xa.theta(wrap) = L;
    for (const auto& e : ta.edges()) {
      const int other = e.tail == wrap ? e.head : (e.head == wrap ? e.tail : -1);
      if (other >= 0) xa.theta(other) = L - 0.5 * std::abs(u(rng));
    }
    HybridState xb;
    xb.theta = VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) xb.theta(perm[k]) = xa.theta(k);
    xb.q = VectorXi::Zero(n - 1);
    REQUIRE(in_D_i(xa, ta, wrap, kDelta));
    REQUIRE(in_D_i(xb, tb, perm[wrap], kDelta));

    const auto ya = jump_g_i(xa, ta, wrap, kDelta);
    const auto yb = jump_g_i(xb, tb, perm[wrap], kDelta);
    const VectorXd ma = mismatch_vector(ya, ta);
    const VectorXd mb = mismatch_vector(yb, tb);
    for (int k = 0; k < n; ++k) CHECK(yb.theta(perm[k]) == ya.theta(k));
    for (int l = 0; l < n - 1; ++l) {
      const auto& e = ta.edges()[l];
      const int pt = perm[e.tail], ph = perm[e.head];
      for (int r = 0; r < n - 1; ++r) {
        const auto& f = tb.edges()[r];
        if (f.tail == pt && f.head == ph) CHECK(mb(r) == doctest::Approx(ma(l)));
        if (f.tail == ph && f.head == pt) CHECK(mb(r) == doctest::Approx(-ma(l)));
      }
    }
  }
}

TEST_CASE("enabled jump lists") {
  const double L = kPi + kDelta;
  const auto p3 = OrientedTree::path(3);
  const auto x = state({-L, L, L}, {0, 0});
  CHECK(enabled_edge_jumps(x, p3, kDelta) == std::vector<int>{0});
  CHECK(enabled_phase_wraps(x, p3, kDelta).empty());
  const auto y = state({L, L, L - 1.0}, {0, 0});
  CHECK(enabled_edge_jumps(y, p3, kDelta).empty());
  CHECK(enabled_phase_wraps(y, p3, kDelta) == std::vector<int>{0, 1});
}

}
