#include "hysync/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>

namespace hysync {

namespace {

std::string join_nodes(const std::vector<int>& nodes, const char* sep) {
  std::ostringstream os;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k != 0) os << sep;
    os << nodes[k] + 1;
  }
  return os.str();
}

// Path between two nodes in an undirected forest, or empty if none.
std::vector<int> forest_path(const std::vector<std::vector<int>>& adj, int from, int to) {
  std::vector<int> parent(adj.size(), -1);
  std::vector<bool> seen(adj.size(), false);
  std::queue<int> frontier;
  frontier.push(from);
  seen[from] = true;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    if (u == to) break;
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        parent[v] = u;
        frontier.push(v);
      }
    }
  }
  if (!seen[to]) return {};
  std::vector<int> path;
  for (int v = to; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

GeneralGraph::GeneralGraph(int num_nodes, std::vector<Edge> edges)
    : num_nodes_(num_nodes), edges_(std::move(edges)) {
  if (num_nodes_ < 1) throw GraphError("graph must have at least one node");
  incidence_ = MatrixXd::Zero(num_nodes_, num_edges());
  for (int l = 0; l < num_edges(); ++l) {
    const Edge& e = edges_[l];
    if (e.tail < 0 || e.tail >= num_nodes_ || e.head < 0 || e.head >= num_nodes_) {
      std::ostringstream os;
      os << "edge " << l + 1 << " (" << e.tail + 1 << "," << e.head + 1 << ") references a node outside 1.."
         << num_nodes_;
      throw GraphError(os.str());
    }
    if (e.tail == e.head) {
      throw GraphError("self-loop at node " + std::to_string(e.tail + 1));
    }
    incidence_(e.tail, l) = -1.0;
    incidence_(e.head, l) = 1.0;
  }
}

std::vector<std::vector<int>> GeneralGraph::adjacency() const {
  std::vector<std::vector<int>> adj(num_nodes_);
  for (const Edge& e : edges_) {
    adj[e.tail].push_back(e.head);
    adj[e.head].push_back(e.tail);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

bool GeneralGraph::is_connected() const {
  const auto adj = adjacency();
  std::vector<bool> seen(num_nodes_, false);
  std::vector<int> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == num_nodes_;
}

OrientedTree OrientedTree::build(int num_nodes, const std::vector<std::pair<int, int>>& undirected_edges) {
  if (num_nodes < 1) throw GraphError("tree must have at least one node");
  std::vector<Edge> edges;
  edges.reserve(undirected_edges.size());
  for (auto [a, b] : undirected_edges) {
    if (a < 0 || a >= num_nodes || b < 0 || b >= num_nodes) {
      std::ostringstream os;
      os << "edge (" << a + 1 << "," << b + 1 << ") references a node outside 1.." << num_nodes;
      throw GraphError(os.str());
    }
    if (a == b) throw GraphError("self-loop at node " + std::to_string(a + 1));
    edges.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(edges.begin(), edges.end());

  // Cycle detection in the canonical edge order; the first closing edge is reported.
  std::vector<std::vector<int>> forest(num_nodes);
  for (const Edge& e : edges) {
    auto path = forest_path(forest, e.tail, e.head);
    if (!path.empty()) {
      path.push_back(e.tail);
      throw GraphError("edge set is not acyclic: edge (" + std::to_string(e.tail + 1) + "," +
                       std::to_string(e.head + 1) + ") closes cycle " + join_nodes(path, "-"));
    }
    forest[e.tail].push_back(e.head);
    forest[e.head].push_back(e.tail);
  }

  GeneralGraph graph(num_nodes, std::move(edges));
  if (!graph.is_connected()) {
    const auto adj = graph.adjacency();
    std::vector<bool> seen(num_nodes, false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    std::vector<int> missing;
    for (int v = 0; v < num_nodes; ++v) {
      if (!seen[v]) missing.push_back(v);
    }
    throw GraphError("edge set is disconnected: nodes {" + join_nodes(missing, ",") +
                     "} are unreachable from node 1");
  }

  if (num_nodes == 1) return OrientedTree(std::move(graph), 0.0);
  const SpectrumReport spectrum = hysync::lambda_min(graph.incidence());
  if (!spectrum.positive) throw GraphError(spectrum.diagnostic);
  return OrientedTree(std::move(graph), spectrum.lambda_min);
}

OrientedTree OrientedTree::path(int num_nodes) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < num_nodes; ++i) edges.emplace_back(i, i + 1);
  return build(num_nodes, edges);
}

OrientedTree OrientedTree::star(int num_nodes) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < num_nodes; ++i) edges.emplace_back(0, i);
  return build(num_nodes, edges);
}

OrientedTree spanning_tree(const GeneralGraph& graph) {
  if (!graph.is_connected()) throw GraphError("spanning tree requested for a disconnected graph");
  const auto adj = graph.adjacency();
  std::vector<bool> seen(graph.num_nodes(), false);
  std::vector<std::pair<int, int>> tree_edges;
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        tree_edges.emplace_back(u, v);
        frontier.push(v);
      }
    }
  }
  return OrientedTree::build(graph.num_nodes(), tree_edges);
}

GeneralGraph counterexample_graph() {
  return GeneralGraph(3, {{0, 1}, {1, 2}, {2, 0}});
}

}  // namespace hysync
