#ifndef HYSYNC_INTEGRATOR_HPP_
#define HYSYNC_INTEGRATOR_HPP_

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hysync/config.hpp"
#include "hysync/dynamics.hpp"
#include "hysync/scenarios.hpp"

namespace hysync {

/// One row of a solution trace. Jump rows carry the event tag ("edge:i-j" or
/// "wrap:i", 1-based) and share t with the preceding row.
struct TraceSample {
  double t = 0.0;
  int j = 0;
  HybridState x;
  double V = 0.0;
  double mismatch_inf = 0.0;
  std::string event;
};

struct DwellStats {
  int jump_count = 0;
  double flow_time = 0.0;
  /// jump_count / flow_time (0 for empty flow).
  double jump_density = 0.0;
  /// Largest number of jumps sharing one flow instant.
  int max_burst = 0;
};

struct SolutionTrace {
  std::vector<TraceSample> samples;
  std::vector<JumpEvent> jump_events;
  DwellStats dwell;
  int num_nodes = 0;
  int num_edges = 0;
  /// Number of times an edge entered equivalent-control sliding.
  int sliding_entries = 0;
};

class IntegratorError : public std::runtime_error {
 public:
  enum class Kind { MaxJumps, EscapedStateSpace, InvalidInput };
  IntegratorError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Hybrid-time simulation over [0, t_end]: classical 4-stage Runge-Kutta flow on
/// theta and aux, bisection location of jump-set entry, edge unwinds before phase
/// wraps, one jump per hybrid instant.
SolutionTrace simulate(const ScenarioConfig& scenario, const IntegratorConfig& cfg);
inline SolutionTrace simulate(const ScenarioConfig& scenario) { return simulate(scenario, scenario.integrator); }

struct BoundaryCrossing {
  /// In [0, 1] along the path.
  double fraction = 0.0;
  JumpKind kind = JumpKind::EdgeUnwind;
  int index = 0;
};

/// Earliest entry into {|theta_tilde_l| >= pi+delta} or {|theta_i| >= pi+delta} along
/// path(s), s in [0, 1], located to within tol in s. Crossings of both kinds within tol
/// resolve to the edge; equal kinds resolve to the lowest index.
std::optional<BoundaryCrossing> detect_boundary(const std::function<HybridState(double)>& path,
                                                const GeneralGraph& graph, double delta, double tol);

/// Same on the linear interpolant between two states with equal q.
std::optional<BoundaryCrossing> detect_boundary(const HybridState& x_prev, const HybridState& x_next,
                                                const GeneralGraph& graph, double delta, double tol);

/// Equivalent coupling (kappa B^T B)^-1 B^T omega for the whole edge set.
VectorXd equivalent_coupling(const GeneralGraph& graph, double kappa, const VectorXd& omega);

/// Sliding derivative on the synchronization set: omega - kappa B sigma_eq when every
/// |sigma_eq| lies inside the regularized interval at 0; nullopt when sliding must be
/// abandoned. Throws IntegratorError if the preconditions (equivalent-control mode,
/// coupling discontinuous at 0, max|theta_tilde| <= sliding_band, tree) do not hold.
std::optional<VectorXd> sliding_step(const HybridState& x, double t, const ScenarioConfig& scenario,
                                     const IntegratorConfig& cfg);

struct DwellEnvelope {
  /// +inf when the trace has fewer jumps than J0.
  double tau_d = std::numeric_limits<double>::infinity();
  double j0 = 0.0;
  /// (1/tau_d)(t - s) + J0 >= j - r re-checked over every pair of jumps.
  bool holds = true;
};

/// Tightest envelope with J0 equal to the largest same-instant burst.
DwellEnvelope dwell_stats(const SolutionTrace& trace);

/// Chatter amplitude bound 2 kappa c sqrt(m) step_h for the fixed-step sign coupling.
double chatter_tolerance(double kappa, double c, int num_edges, double step_h);

}  // namespace hysync

#endif  // HYSYNC_INTEGRATOR_HPP_
