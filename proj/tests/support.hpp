#ifndef HYSYNC_TESTS_SUPPORT_HPP_
#define HYSYNC_TESTS_SUPPORT_HPP_

#include <cmath>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hysync/graph.hpp"

namespace hysync::test {

inline std::filesystem::path scenario_dir() { return HYSYNC_SCENARIO_DIR; }

/// Uniform random labelled tree on n nodes decoded from a Pruefer sequence.
inline std::vector<std::pair<int, int>> random_tree_edges(int n, std::mt19937_64& rng) {
  std::vector<std::pair<int, int>> edges;
  if (n == 2) {
    edges.emplace_back(0, 1);
    return edges;
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> code(n - 2);
  for (int& c : code) c = pick(rng);
  std::vector<int> degree(n, 1);
  for (int c : code) ++degree[c];
  for (int c : code) {
    for (int leaf = 0; leaf < n; ++leaf) {
      if (degree[leaf] == 1) {
        edges.emplace_back(leaf, c);
        --degree[leaf];
        --degree[c];
        break;
      }
    }
  }
  int u = -1;
  for (int v = 0; v < n; ++v) {
    if (degree[v] == 1) {
      if (u < 0) {
        u = v;
      } else {
        edges.emplace_back(u, v);
      }
    }
  }
  return edges;
}

/// Smallest nonzero Laplacian eigenvalue by bisection on Sturm counts of the
/// characteristic polynomial, used as a solver-independent reference for B^T B.
inline double brute_force_lambda_min(const Eigen::MatrixXd& incidence) {
  const Eigen::MatrixXd gram = incidence.transpose() * incidence;
  const int m = static_cast<int>(gram.rows());
  // Count eigenvalues below x through the inertia of gram - x I (LDL^T pivots).
  auto count_below = [&](double x) {
    Eigen::MatrixXd a = gram - x * Eigen::MatrixXd::Identity(m, m);
    int negatives = 0;
    for (int k = 0; k < m; ++k) {
      int p = k;
      for (int r = k + 1; r < m; ++r)
        if (std::abs(a(r, r)) > std::abs(a(p, p))) p = r;
      if (p != k) {
        a.row(k).swap(a.row(p));
        a.col(k).swap(a.col(p));
      }
      const double d = a(k, k) == 0.0 ? 1e-300 : a(k, k);
      if (d < 0) ++negatives;
      for (int r = k + 1; r < m; ++r) {
        const double f = a(r, k) / d;
        for (int c = k + 1; c < m; ++c) a(r, c) -= f * a(k, c);
      }
    }
    return negatives;
  };
  double lo = 0.0;
  double hi = 2.0 * incidence.rows();
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (count_below(mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace hysync::test

#endif  // HYSYNC_TESTS_SUPPORT_HPP_
