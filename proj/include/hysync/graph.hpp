#ifndef HYSYNC_GRAPH_HPP_
#define HYSYNC_GRAPH_HPP_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hysync/types.hpp"

namespace hysync {

/// Directed edge between two nodes (0-based indices). Its incidence column is e_head - e_tail.
struct Edge {
  int tail = 0;
  int head = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Oriented graph with its node-by-edge incidence matrix. Cycles are permitted.
class GeneralGraph {
 public:
  GeneralGraph() = default;
  GeneralGraph(int num_nodes, std::vector<Edge> edges);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const MatrixXd& incidence() const { return incidence_; }

  /// Undirected skeleton connected.
  bool is_connected() const;
  /// Connected with exactly n - 1 edges (hence acyclic).
  bool is_tree() const { return num_edges() == num_nodes_ - 1 && is_connected(); }

  /// Neighbour lists of the undirected skeleton, sorted by index.
  std::vector<std::vector<int>> adjacency() const;

  friend bool operator==(const GeneralGraph& a, const GeneralGraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_;
  }

 private:
  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  MatrixXd incidence_;
};

/// Tree with tail = smaller index, edges in lexicographic (tail, head) order and
/// the cached smallest eigenvalue of B^T B.
class OrientedTree : public GeneralGraph {
 public:
  OrientedTree() = default;

  /// Throws GraphError naming the offending cycle or unreachable nodes.
  static OrientedTree build(int num_nodes, const std::vector<std::pair<int, int>>& undirected_edges);

  /// Path 0 - 1 - ... - (n-1).
  static OrientedTree path(int num_nodes);
  /// Star centred on node 0.
  static OrientedTree star(int num_nodes);

  double lambda_min() const { return lambda_min_; }

 private:
  OrientedTree(GeneralGraph g, double lambda) : GeneralGraph(std::move(g)), lambda_min_(lambda) {}

  double lambda_min_ = 0.0;
};

struct SpectrumReport {
  double lambda_min = 0.0;
  bool positive = false;
  std::string diagnostic;
};

inline constexpr double kEigenRelTol = 1e-10;

/// Smallest eigenvalue of B^T B. Values below kEigenRelTol relative to the largest
/// eigenvalue are reported as exactly zero together with a non-tree diagnostic.
template <typename Derived>
SpectrumReport lambda_min(const Eigen::MatrixBase<Derived>& incidence) {
  using Scalar = typename Derived::Scalar;
  SpectrumReport report;
  if (incidence.cols() == 0) {
    report.diagnostic = "graph has no edges";
    return report;
  }
  const MatrixX<Scalar> gram = incidence.transpose() * incidence;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(gram, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  const double largest = std::max(1.0, static_cast<double>(ev.maxCoeff()));
  const double smallest = static_cast<double>(ev.minCoeff());
  if (smallest <= kEigenRelTol * largest) {
    report.lambda_min = 0.0;
    report.diagnostic =
        "B^T B is singular: the edge set contains a cycle, so the graph is not a tree and "
        "the mismatch is not detectable from the coupling vector";
    return report;
  }
  report.lambda_min = smallest;
  report.positive = true;
  return report;
}

/// Breadth-first spanning tree from node 0, visiting neighbours by ascending index.
OrientedTree spanning_tree(const GeneralGraph& graph);

/// Three-node cycle whose incidence columns are e2-e1, e3-e2, e1-e3.
GeneralGraph counterexample_graph();

}  // namespace hysync

#endif  // HYSYNC_GRAPH_HPP_
