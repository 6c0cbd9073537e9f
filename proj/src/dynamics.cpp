#include "hysync/dynamics.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <sstream>

namespace hysync {

bool in_X(const HybridState& x, double delta, double tol) {
  const double L = kPi + delta;
  if (x.theta.size() > 0 && x.theta.cwiseAbs().maxCoeff() > L + tol) return false;
  for (Eigen::Index l = 0; l < x.q.size(); ++l) {
    if (x.q(l) < -1 || x.q(l) > 1) return false;
  }
  return true;
}

bool in_C(const HybridState& x, const GeneralGraph& graph, double delta, double tol) {
  if (!in_X(x, delta, tol)) return false;
  if (graph.num_edges() == 0) return true;
  return mismatch_vector(x, graph).cwiseAbs().maxCoeff() <= kPi + delta + tol;
}

StateDerivative flow_map(const HybridState& x, const VectorXd& omega, double kappa, const GeneralGraph& graph,
                         const CouplingSpec& spec) {
  if (!in_C(x, graph, spec.delta())) {
    throw FlowSetError("flow map evaluated outside the flow set C");
  }
  const VectorXd mismatch = mismatch_vector(x, graph);
  VectorXd sigma(mismatch.size());
  for (Eigen::Index l = 0; l < mismatch.size(); ++l) sigma(l) = eval_sigma(spec, mismatch(l));
  StateDerivative d;
  d.theta = omega - kappa * (graph.incidence() * sigma);
  d.q = VectorXd::Zero(x.q.size());
  return d;
}

bool in_D_ij(const HybridState& x, const GeneralGraph& graph, int edge, double delta) {
  const Edge& e = graph.edges().at(edge);
  const double mismatch = x.theta(e.head) - x.theta(e.tail) + kTwoPi * x.q(edge);
  return std::abs(mismatch) >= kPi + delta;
}

bool in_D_i(const HybridState& x, const GeneralGraph& graph, int node, double delta) {
  const double L = kPi + delta;
  if (std::abs(x.theta(node)) != L) return false;
  if (graph.num_edges() == 0) return true;
  return mismatch_vector(x, graph).cwiseAbs().maxCoeff() <= L;
}

std::vector<HybridState> jump_G_ij(const HybridState& x, const GeneralGraph& graph, int edge, double delta) {
  if (!in_D_ij(x, graph, edge, delta)) {
    throw JumpError("edge-unwind jump requested for edge " + std::to_string(edge + 1) + " outside its jump set");
  }
  const Edge& e = graph.edges()[edge];
  const double diff = x.theta(e.head) - x.theta(e.tail);
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 3> cost{};
  for (int h = -1; h <= 1; ++h) {
    cost[h + 1] = std::abs(diff + kTwoPi * h);
    best = std::min(best, cost[h + 1]);
  }
  std::vector<HybridState> out;
  for (int h = -1; h <= 1; ++h) {
    // Exact ties only: the candidates differ by multiples of 2 pi, so rounding is symmetric.
    if (cost[h + 1] == best) {
      HybridState next = x;
      next.q(edge) = h;
      out.push_back(std::move(next));
    }
  }
  return out;
}

HybridState jump_g_i(const HybridState& x, const GeneralGraph& graph, int node, double delta) {
  if (!in_D_i(x, graph, node, delta)) {
    throw JumpError("phase-wrap jump requested for node " + std::to_string(node + 1) + " outside its jump set");
  }
  const int s = x.theta(node) > 0.0 ? 1 : -1;
  HybridState next = x;
  next.theta(node) = x.theta(node) - s * kTwoPi;
  for (int l = 0; l < graph.num_edges(); ++l) {
    const Edge& e = graph.edges()[l];
    if (e.head == node) next.q(l) += s;
    if (e.tail == node) next.q(l) -= s;
    if (next.q(l) < -1 || next.q(l) > 1) {
      std::ostringstream os;
      os << "phase wrap of node " << node + 1 << " drove q on edge " << l + 1 << " to " << next.q(l)
         << "; the jump-set invariant is broken";
      throw JumpError(os.str());
    }
  }
  return next;
}

bool in_A(const HybridState& x, const GeneralGraph& graph, double tol) {
  if (graph.num_edges() == 0) return true;
  return mismatch_vector(x, graph).cwiseAbs().maxCoeff() <= tol;
}

std::vector<int> enabled_edge_jumps(const HybridState& x, const GeneralGraph& graph, double delta) {
  std::vector<int> out;
  for (int l = 0; l < graph.num_edges(); ++l) {
    if (in_D_ij(x, graph, l, delta)) out.push_back(l);
  }
  return out;
}

std::vector<int> enabled_phase_wraps(const HybridState& x, const GeneralGraph& graph, double delta) {
  std::vector<int> out;
  for (int i = 0; i < graph.num_nodes(); ++i) {
    if (in_D_i(x, graph, i, delta)) out.push_back(i);
  }
  return out;
}

}  // namespace hysync
