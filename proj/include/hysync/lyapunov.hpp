#ifndef HYSYNC_LYAPUNOV_HPP_
#define HYSYNC_LYAPUNOV_HPP_

#include <optional>
#include <string>
#include <vector>

#include "hysync/config.hpp"
#include "hysync/coupling.hpp"
#include "hysync/dynamics.hpp"
#include "hysync/graph.hpp"

namespace hysync {

struct ScenarioConfig;
struct SolutionTrace;

/// Sum over edges of the saturated antiderivative of sigma at theta_tilde.
template <typename Derived>
double lyapunov_V(const Eigen::MatrixBase<Derived>& mismatch, const CouplingSpec& spec) {
  double v = 0.0;
  for (Eigen::Index l = 0; l < mismatch.size(); ++l) v += antiderivative(spec, mismatch(l));
  return v;
}

inline double lyapunov_V(const HybridState& x, const GeneralGraph& graph, const CouplingSpec& spec) {
  return lyapunov_V(mismatch_vector(x, graph), spec);
}

/// max of V over C: m times the antiderivative at pi + delta.
double v_bar(const GeneralGraph& graph, const CouplingSpec& spec);

/// (n - 1)(omega_max - omega_min).
double omega_bar(int n, double omega_min, double omega_max);

/// 2 c omega_bar / (lambda mu^2); nullopt when mu is absent (sigma continuous at 0).
std::optional<double> kappa_star(double c, double omega_bar, double lambda_min, std::optional<double> mu);

struct FiniteTimeBound {
  double T = 0.0;
  /// kappa >= kappa_star.
  bool guaranteed = false;
  std::string warning;
};

/// T = 2 v_bar / (kappa lambda mu^2), with a warning when kappa < kappa_star.
FiniteTimeBound finite_time_bound(double kappa, double lambda_min, double mu, double v_bar,
                                  std::optional<double> kappa_star = std::nullopt);

/// Every derived constant of a scenario, in one place.
struct ScenarioConstants {
  double c = 0.0;
  std::optional<double> mu;
  double lambda_min = 0.0;
  Interval omega_range;
  double omega_bar = 0.0;
  double v_bar = 0.0;
  std::optional<double> kappa_star;
  /// Present for discontinuous sigma on a tree with kappa > 0.
  std::optional<FiniteTimeBound> bound;
};

ScenarioConstants scenario_constants(const ScenarioConfig& scenario);

struct FlowViolation {
  double t = 0.0;
  int j = 0;
  double slope = 0.0;
  double bound = 0.0;
};

struct LyapunovReport {
  std::string scenario_id;
  double kappa = 0.0;
  SigmaFamily family = SigmaFamily::Ramp;
  SlidingMode sliding = SlidingMode::Chatter;
  ScenarioConstants constants;

  /// V(post) - V(pre) per jump, in trace order, with the jump kind alongside.
  std::vector<double> jump_defects;
  std::vector<JumpKind> jump_kinds;
  double max_jump_defect = 0.0;
  int wrap_defect_count = 0;
  int edge_nondecrease_count = 0;

  std::vector<FlowViolation> flow_violations;
  int slope_samples = 0;

  double reach_tolerance = 0.0;
  std::optional<double> reach_time;
  /// max|theta_tilde| <= reach_tolerance on every sample after reach_time.
  bool stays_after_reach = false;
  /// Largest max|theta_tilde| after reach_time (0 when never reached).
  double post_reach_mismatch = 0.0;
  double final_mismatch = 0.0;
  double initial_V = 0.0;
  double final_V = 0.0;
  bool V_constant = false;
  int num_jumps = 0;

  bool converged() const { return reach_time.has_value() && stays_after_reach; }
  /// Bound applies (kappa >= kappa_star) and the trace stayed in the attractor band from some t <= T.
  bool bound_certified() const;
  /// Lyapunov claims hold: jump non-increase, no flow violations, and the finite-time
  /// bound is met whenever it is guaranteed.
  bool passed() const;

  /// key: value lines.
  std::string to_text() const;
  static std::string summary_header();
  std::string summary_row() const;
};

/// Jump defects, sampled flow slopes (central differences over five samples within one
/// jump counter and a fixed sign pattern) and reach time. Throws std::invalid_argument
/// when the trace dimensions do not match the scenario.
LyapunovReport audit_trace(const SolutionTrace& trace, const ScenarioConfig& scenario, const IntegratorConfig& cfg);

}  // namespace hysync

#endif  // HYSYNC_LYAPUNOV_HPP_
