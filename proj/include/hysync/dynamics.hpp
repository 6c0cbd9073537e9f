#ifndef HYSYNC_DYNAMICS_HPP_
#define HYSYNC_DYNAMICS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "hysync/coupling.hpp"
#include "hysync/graph.hpp"
#include "hysync/types.hpp"

namespace hysync {

/// x = (theta, q) plus pass-through auxiliary state (second-order frequencies).
struct HybridState {
  VectorXd theta;
  VectorXi q;
  VectorXd aux;

  friend bool operator==(const HybridState& a, const HybridState& b) {
    return a.theta.size() == b.theta.size() && a.q.size() == b.q.size() && a.aux.size() == b.aux.size() &&
           a.theta == b.theta && a.q == b.q && a.aux == b.aux;
  }
};

enum class JumpKind { EdgeUnwind, PhaseWrap };

struct JumpEvent {
  JumpKind kind = JumpKind::EdgeUnwind;
  /// Edge index for EdgeUnwind, node index for PhaseWrap.
  int index = 0;
  HybridState pre;
  std::vector<HybridState> post;
  double t = 0.0;
  /// Jump counter before the jump.
  int j = 0;
};

class JumpError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class FlowSetError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// theta_tilde = B^T theta + 2 pi q, one entry per edge.
template <typename DerivedTheta, typename DerivedQ>
VectorXd mismatch_vector(const Eigen::MatrixBase<DerivedTheta>& theta, const Eigen::MatrixBase<DerivedQ>& q,
                         const GeneralGraph& graph) {
  return graph.incidence().transpose() * theta + kTwoPi * q.template cast<double>();
}

inline VectorXd mismatch_vector(const HybridState& x, const GeneralGraph& graph) {
  return mismatch_vector(x.theta, x.q, graph);
}

/// Membership in X: |theta_i| <= pi+delta and q in {-1,0,1}^m.
bool in_X(const HybridState& x, double delta, double tol = 0.0);

/// Membership in C: x in X and every |theta_tilde| <= pi+delta.
bool in_C(const HybridState& x, const GeneralGraph& graph, double delta, double tol = 0.0);

struct StateDerivative {
  VectorXd theta;
  /// Identically zero; q only changes at jumps.
  VectorXd q;
  VectorXd aux;
};

/// dtheta = omega - kappa B sigma(theta_tilde), dq = 0. Throws FlowSetError if x is not in C.
/// The aux derivative is left empty; the frequency model supplies it.
StateDerivative flow_map(const HybridState& x, const VectorXd& omega, double kappa, const GeneralGraph& graph,
                         const CouplingSpec& spec);

/// |theta_tilde_edge| >= pi + delta.
bool in_D_ij(const HybridState& x, const GeneralGraph& graph, int edge, double delta);

/// |theta_i| = pi + delta and no edge strictly inside its jump set.
bool in_D_i(const HybridState& x, const GeneralGraph& graph, int node, double delta);

/// Every minimizer h of |theta_j - theta_i + 2 h pi| in ascending h; theta unchanged.
std::vector<HybridState> jump_G_ij(const HybridState& x, const GeneralGraph& graph, int edge, double delta);

/// theta_i -> theta_i - sign(theta_i) 2 pi with compensating q updates on incident edges.
HybridState jump_g_i(const HybridState& x, const GeneralGraph& graph, int node, double delta);

/// max |theta_tilde| <= tol.
bool in_A(const HybridState& x, const GeneralGraph& graph, double tol = 0.0);

/// Edges with x in D_ij, ascending.
std::vector<int> enabled_edge_jumps(const HybridState& x, const GeneralGraph& graph, double delta);
/// Nodes with x in D_i, ascending.
std::vector<int> enabled_phase_wraps(const HybridState& x, const GeneralGraph& graph, double delta);

}  // namespace hysync

#endif  // HYSYNC_DYNAMICS_HPP_
