#include "hysync/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "hysync/integrator.hpp"
#include "hysync/scenarios.hpp"

namespace hysync {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v, const char* absent = "n/a") { return v ? fmt(*v) : absent; }

const char* yes_no(bool b) { return b ? "yes" : "no"; }

VectorXi sign_pattern(const VectorXd& mis) {
  VectorXi s(mis.size());
  for (Eigen::Index l = 0; l < mis.size(); ++l) s(l) = (mis(l) > 0.0) - (mis(l) < 0.0);
  return s;
}

}  // namespace

double v_bar(const GeneralGraph& graph, const CouplingSpec& spec) {
  return graph.num_edges() * antiderivative(spec, spec.half_width());
}

double omega_bar(int n, double omega_min, double omega_max) {
  if (omega_min > omega_max) throw std::invalid_argument("omega_bar: omega_min exceeds omega_max");
  return std::max(0, n - 1) * (omega_max - omega_min);
}

std::optional<double> kappa_star(double c, double omega_bar, double lambda_min, std::optional<double> mu) {
  if (!mu || !(*mu > 0.0)) return std::nullopt;
  if (!(lambda_min > 0.0)) throw std::invalid_argument("kappa_star: lambda_min must be positive");
  return 2.0 * c * omega_bar / (lambda_min * (*mu) * (*mu));
}

FiniteTimeBound finite_time_bound(double kappa, double lambda_min, double mu, double v_bar,
                                  std::optional<double> kappa_star) {
  if (!(kappa > 0.0) || !(lambda_min > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("finite_time_bound: kappa, lambda_min and mu must be positive");
  FiniteTimeBound b;
  b.T = 2.0 * v_bar / (kappa * lambda_min * mu * mu);
  if (kappa_star) {
    b.guaranteed = kappa >= *kappa_star;
    if (!b.guaranteed) b.warning = "kappa " + fmt(kappa) + " below kappa_star " + fmt(*kappa_star) + ": bound not guaranteed";
  } else {
    b.warning = "kappa_star unknown: bound not guaranteed";
  }
  return b;
}

ScenarioConstants scenario_constants(const ScenarioConfig& scenario) {
  ScenarioConstants k;
  const CouplingSpec& spec = scenario.coupling;
  k.c = sigma_sup_c(spec);
  k.mu = sector_mu(spec);
  k.lambda_min = scenario.spectrum().lambda_min;
  k.omega_range = scenario.frequency_model()->bounds();
  k.omega_bar = omega_bar(scenario.num_nodes(), k.omega_range.lo, k.omega_range.hi);
  k.v_bar = v_bar(scenario.graph, spec);
  if (k.lambda_min > 0.0) k.kappa_star = kappa_star(k.c, k.omega_bar, k.lambda_min, k.mu);
  if (k.mu && k.lambda_min > 0.0 && scenario.kappa > 0.0)
    k.bound = finite_time_bound(scenario.kappa, k.lambda_min, *k.mu, k.v_bar, k.kappa_star);
  return k;
}

bool LyapunovReport::bound_certified() const {
  return constants.bound && constants.bound->guaranteed && converged() && *reach_time <= constants.bound->T;
}

bool LyapunovReport::passed() const {
  const bool jumps_ok = wrap_defect_count == 0 && edge_nondecrease_count == 0;
  const bool bound_ok = !(constants.bound && constants.bound->guaranteed) || bound_certified();
  return jumps_ok && flow_violations.empty() && bound_ok;
}

std::string LyapunovReport::to_text() const {
  std::ostringstream os;
  os << "scenario: " << scenario_id << '\n'
     << "kappa: " << fmt(kappa) << '\n'
     << "sigma: " << to_string(family) << '\n'
     << "sliding: " << to_string(sliding) << '\n'
     << "lambda_min: " << fmt(constants.lambda_min) << '\n'
     << "c: " << fmt(constants.c) << '\n'
     << "mu: " << fmt(constants.mu) << '\n'
     << "omega_min: " << fmt(constants.omega_range.lo) << '\n'
     << "omega_max: " << fmt(constants.omega_range.hi) << '\n'
     << "omega_bar: " << fmt(constants.omega_bar) << '\n'
     << "v_bar: " << fmt(constants.v_bar) << '\n'
     << "kappa_star: " << fmt(constants.kappa_star) << '\n'
     << "T: " << (constants.bound ? fmt(constants.bound->T) : "n/a") << '\n'
     << "T_guaranteed: " << yes_no(constants.bound && constants.bound->guaranteed) << '\n';
  if (constants.bound && !constants.bound->warning.empty()) os << "T_warning: " << constants.bound->warning << '\n';
  os << "jumps: " << num_jumps << '\n'
     << "max_jump_defect: " << fmt(max_jump_defect) << '\n'
     << "wrap_defects: " << wrap_defect_count << '\n'
     << "edge_nondecrease: " << edge_nondecrease_count << '\n'
     << "slope_samples: " << slope_samples << '\n'
     << "flow_violations: " << flow_violations.size() << '\n';
  for (std::size_t k = 0; k < std::min<std::size_t>(flow_violations.size(), 5); ++k) {
    const FlowViolation& v = flow_violations[k];
    os << "flow_violation: t=" << fmt(v.t) << " j=" << v.j << " slope=" << fmt(v.slope) << " bound=" << fmt(v.bound)
       << '\n';
  }
  os << "reach_tolerance: " << fmt(reach_tolerance) << '\n'
     << "reach_time: " << fmt(reach_time, "never") << '\n'
     << "stays_after_reach: " << yes_no(stays_after_reach) << '\n'
     << "post_reach_mismatch: " << fmt(post_reach_mismatch) << '\n'
     << "final_mismatch: " << fmt(final_mismatch) << '\n'
     << "V_initial: " << fmt(initial_V) << '\n'
     << "V_final: " << fmt(final_V) << '\n'
     << "V_constant: " << yes_no(V_constant) << '\n'
     << "converged: " << yes_no(converged()) << '\n'
     << "bound_certified: " << yes_no(bound_certified()) << '\n'
     << "status: " << (passed() ? "pass" : "fail") << '\n';
  return os.str();
}

std::string LyapunovReport::summary_header() {
  return "scenario,kappa,sigma,lambda_min,omega_bar,kappa_star,T,reach_time,max_jump_defect,flow_violations,"
         "final_mismatch,converged,status";
}

std::string LyapunovReport::summary_row() const {
  std::ostringstream os;
  os << scenario_id << ',' << fmt(kappa) << ',' << to_string(family) << ',' << fmt(constants.lambda_min) << ','
     << fmt(constants.omega_bar) << ',' << fmt(constants.kappa_star, "") << ','
     << (constants.bound ? fmt(constants.bound->T) : "") << ',' << fmt(reach_time, "") << ',' << fmt(max_jump_defect)
     << ',' << flow_violations.size() << ',' << fmt(final_mismatch) << ',' << (converged() ? 1 : 0) << ','
     << (passed() ? "pass" : "fail");
  return os.str();
}

LyapunovReport audit_trace(const SolutionTrace& trace, const ScenarioConfig& scenario, const IntegratorConfig& cfg) {
  const int n = scenario.num_nodes();
  const int m = scenario.num_edges();
  if (trace.samples.empty()) throw std::invalid_argument("audit_trace: empty trace");
  if (trace.num_nodes != n || trace.num_edges != m)
    throw std::invalid_argument("audit_trace: trace has " + std::to_string(trace.num_nodes) + " nodes / " +
                                std::to_string(trace.num_edges) + " edges, scenario has " + std::to_string(n) + " / " +
                                std::to_string(m));
  for (const TraceSample& s : trace.samples)
    if (s.x.theta.size() != n || s.x.q.size() != m)
      throw std::invalid_argument("audit_trace: sample dimensions do not match the scenario");

  const CouplingSpec& spec = scenario.coupling;
  LyapunovReport r;
  r.scenario_id = scenario.id;
  r.kappa = scenario.kappa;
  r.family = spec.family();
  r.sliding = cfg.sliding;
  r.constants = scenario_constants(scenario);
  const ScenarioConstants& k = r.constants;

  const std::size_t N = trace.samples.size();
  std::vector<VectorXd> mis(N);
  std::vector<double> V(N), inf(N);
  for (std::size_t a = 0; a < N; ++a) {
    mis[a] = mismatch_vector(trace.samples[a].x, scenario.graph);
    V[a] = lyapunov_V(mis[a], spec);
    inf[a] = m > 0 ? mis[a].cwiseAbs().maxCoeff() : 0.0;
  }

  bool any_jump = false;
  for (std::size_t a = 0; a + 1 < N; ++a) {
    if (trace.samples[a + 1].j != trace.samples[a].j + 1) continue;
    const double dv = V[a + 1] - V[a];
    const bool edge = trace.samples[a + 1].event.rfind("edge", 0) == 0;
    r.jump_defects.push_back(dv);
    r.jump_kinds.push_back(edge ? JumpKind::EdgeUnwind : JumpKind::PhaseWrap);
    r.max_jump_defect = any_jump ? std::max(r.max_jump_defect, dv) : dv;
    any_jump = true;
    if (edge && !(dv < 0.0)) ++r.edge_nondecrease_count;
    if (!edge && dv > 1e-10) ++r.wrap_defect_count;
  }
  r.num_jumps = static_cast<int>(r.jump_defects.size());

  const bool eq_active = cfg.sliding == SlidingMode::EquivalentControl && spec.discontinuous_at_zero() &&
                         scenario.kappa > 0.0 && m > 0;
  r.reach_tolerance = eq_active ? 1e-9 : chatter_tolerance(scenario.kappa, k.c, m, cfg.step_h);

  const double kl = scenario.kappa * k.lambda_min;
  const double w_eff = std::max(n - 1, m) * (k.omega_range.hi - k.omega_range.lo);
  const bool prescribed = k.mu && k.kappa_star && scenario.kappa >= *k.kappa_star && k.lambda_min > 0.0;
  for (std::size_t a = 2; a + 2 < N; ++a) {
    const int j = trace.samples[a].j;
    bool same = true;
    for (std::size_t b = a - 2; b <= a + 2; ++b) same = same && trace.samples[b].j == j;
    if (!same) continue;
    const double span = trace.samples[a + 2].t - trace.samples[a - 2].t;
    if (!(span > 0.0)) continue;
    const VectorXi pattern = sign_pattern(mis[a]);
    bool fixed = true;
    for (std::size_t b = a - 2; b <= a + 2 && fixed; ++b) fixed = sign_pattern(mis[b]) == pattern;
    if (!fixed) continue;
    ++r.slope_samples;
    const double slope = (V[a + 2] - V[a - 2]) / span;
    const double s2 = sigma_vector(spec, mis[a]).squaredNorm();
    const double general = -kl * s2 + k.c * w_eff;
    if (slope > general + 1e-2 * (kl * s2 + k.c * w_eff) + 1e-9) {
      r.flow_violations.push_back({trace.samples[a].t, j, slope, general});
      continue;
    }
    if (prescribed) {
      bool outside = true;
      for (std::size_t b = a - 2; b <= a + 2; ++b) outside = outside && inf[b] > r.reach_tolerance;
      const double mu2 = (*k.mu) * (*k.mu);
      const double bound = -0.5 * kl * mu2;
      if (outside && slope > bound + 1e-2 * kl * mu2) r.flow_violations.push_back({trace.samples[a].t, j, slope, bound});
    }
  }

  for (std::size_t a = 0; a < N; ++a) {
    if (inf[a] <= r.reach_tolerance) {
      r.reach_time = trace.samples[a].t;
      r.stays_after_reach = true;
      for (std::size_t b = a; b < N; ++b) {
        r.post_reach_mismatch = std::max(r.post_reach_mismatch, inf[b]);
        if (inf[b] > r.reach_tolerance) r.stays_after_reach = false;
      }
      break;
    }
  }
  r.final_mismatch = inf.back();
  r.initial_V = V.front();
  r.final_V = V.back();
  r.V_constant = true;
  for (double v : V) r.V_constant = r.V_constant && std::abs(v - V.front()) <= 1e-9 * std::max(1.0, std::abs(V.front()));
  return r;
}

}  // namespace hysync
