#include "hysync/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <Eigen/Cholesky>

#include "hysync/lyapunov.hpp"

namespace hysync {
namespace {

constexpr double kTimeEps = 1e-12;

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

std::string edge_tag(const GeneralGraph& g, int l) {
  const Edge& e = g.edges()[static_cast<std::size_t>(l)];
  return "edge:" + std::to_string(e.tail + 1) + "-" + std::to_string(e.head + 1);
}

struct Triggers {
  std::vector<int> edges;
  std::vector<int> nodes;
  std::vector<int> entries;

  bool any() const { return !edges.empty() || !nodes.empty() || !entries.empty(); }
};

void boundary_triggers(const VectorXd& theta, const VectorXd& mis, double L, Triggers& out) {
  for (Eigen::Index l = 0; l < mis.size(); ++l)
    if (std::abs(mis(l)) >= L) out.edges.push_back(static_cast<int>(l));
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (std::abs(theta(i)) >= L) out.nodes.push_back(static_cast<int>(i));
}

class Engine {
 public:
  Engine(const ScenarioConfig& sc, const IntegratorConfig& cfg)
      : sc_(sc),
        cfg_(cfg),
        g_(sc.graph),
        B_(sc.graph.incidence()),
        spec_(sc.coupling),
        kappa_(sc.kappa),
        L_(sc.coupling.half_width()),
        model_(sc.frequency_model()),
        n_(sc.num_nodes()),
        m_(sc.num_edges()) {
    breakpoints_ = model_->breakpoints();
    std::sort(breakpoints_.begin(), breakpoints_.end());
    eq_ = cfg_.sliding == SlidingMode::EquivalentControl && spec_.discontinuous_at_zero() && kappa_ > 0.0 && m_ > 0;
    r0_ = std::abs(spec_.right_limit_at_zero());
    sliding_.assign(static_cast<std::size_t>(m_), 0);
    exit_value_.assign(static_cast<std::size_t>(m_), std::numeric_limits<double>::quiet_NaN());
    side_.assign(static_cast<std::size_t>(m_), 0);
    if (eq_ && !g_.is_tree())
      throw IntegratorError(IntegratorError::Kind::InvalidInput,
                            "equivalent-control sliding requires a tree: B^T B is singular on cyclic graphs");
  }

  SolutionTrace run() {
    x_ = sc_.initial;
    const int aux_dim = model_->aux_dim();
    if (x_.theta.size() != n_ || x_.q.size() != m_ || x_.aux.size() != aux_dim)
      throw IntegratorError(IntegratorError::Kind::InvalidInput, "initial state dimensions do not match the scenario");
    if (!in_X(x_, spec_.delta(), cfg_.event_tol))
      throw IntegratorError(IntegratorError::Kind::InvalidInput, "initial state outside X");
    for (Eigen::Index i = 0; i < n_; ++i) x_.theta(i) = std::clamp(x_.theta(i), -L_, L_);
    const VectorXd mis0 = mismatch(x_.theta);
    if (m_ > 0 && inf_norm(mis0) > L_ + cfg_.event_tol && enabled_edge_jumps(x_, g_, spec_.delta()).empty())
      throw IntegratorError(IntegratorError::Kind::InvalidInput, "initial state outside C and D");

    trace_.num_nodes = n_;
    trace_.num_edges = m_;
    t_ = 0.0;
    j_ = 0;
    record("");

    while (true) {
      process_jumps();
      if (eq_) update_sliding();
      if (t_ >= cfg_.t_end - kTimeEps) break;
      step();
    }
    finish();
    return std::move(trace_);
  }

 private:
  VectorXd mismatch(const VectorXd& theta) const {
    return B_.transpose() * theta + kTwoPi * x_.q.cast<double>();
  }

  bool any_sliding() const { return std::any_of(sliding_.begin(), sliding_.end(), [](char c) { return c != 0; }); }

  /// Sliding edge list and the factorization of B_S^T B_S.
  void refresh_sliding_cache() const {
    if (!cache_dirty_) return;
    s_idx_.clear();
    for (int l = 0; l < m_; ++l)
      if (sliding_[static_cast<std::size_t>(l)]) s_idx_.push_back(l);
    bs_.resize(n_, static_cast<Eigen::Index>(s_idx_.size()));
    for (std::size_t k = 0; k < s_idx_.size(); ++k) bs_.col(static_cast<Eigen::Index>(k)) = B_.col(s_idx_[k]);
    if (!s_idx_.empty()) {
      gram_.compute(bs_.transpose() * bs_);
    }
    cache_dirty_ = false;
  }

  /// Coupling values of non-sliding edges at theta.
  void outer_sigma(const VectorXd& mis, VectorXd& sig) const {
    sig.resize(m_);
    for (int l = 0; l < m_; ++l) {
      const auto ul = static_cast<std::size_t>(l);
      if (eq_ && sliding_[ul]) {
        sig(l) = 0.0;
      } else if (mis(l) == 0.0 && !std::isnan(exit_value_[ul])) {
        sig(l) = exit_value_[ul];
      } else if (eq_ && side_[ul] != 0 && (mis(l) > 0.0 ? 1 : -1) != side_[ul]) {
        sig(l) = side_[ul] * r0_;
      } else {
        sig(l) = eval_sigma_saturated(spec_, mis(l));
      }
    }
  }

  /// Equivalent coupling on the sliding set given the outer coupling values.
  VectorXd sliding_sigma(const VectorXd& omega, const VectorXd& sig) const {
    refresh_sliding_cache();
    const VectorXd residual = omega - kappa_ * B_ * sig;
    return gram_.solve(bs_.transpose() * residual) / kappa_;
  }

  void rhs(double t, const VectorXd& theta, const VectorXd& aux, VectorXd& dtheta, VectorXd& daux) const {
    model_->omega(t, theta, aux, omega_buf_);
    outer_sigma(mismatch(theta), sig_buf_);
    if (eq_ && any_sliding()) {
      const VectorXd s = sliding_sigma(omega_buf_, sig_buf_);
      for (std::size_t k = 0; k < s_idx_.size(); ++k) sig_buf_(s_idx_[k]) = s(static_cast<Eigen::Index>(k));
    }
    dtheta = omega_buf_ - kappa_ * (B_ * sig_buf_);
    model_->aux_rate(t, theta, aux, daux);
  }

  void rk4(double t, double h, VectorXd& theta, VectorXd& aux) const {
    const VectorXd th0 = x_.theta;
    const VectorXd ax0 = x_.aux;
    VectorXd k1, k2, k3, k4, a1, a2, a3, a4;
    rhs(t, th0, ax0, k1, a1);
    const bool has_aux = ax0.size() > 0;
    rhs(t + 0.5 * h, th0 + 0.5 * h * k1, has_aux ? VectorXd(ax0 + 0.5 * h * a1) : ax0, k2, a2);
    rhs(t + 0.5 * h, th0 + 0.5 * h * k2, has_aux ? VectorXd(ax0 + 0.5 * h * a2) : ax0, k3, a3);
    rhs(t + h, th0 + h * k3, has_aux ? VectorXd(ax0 + h * a3) : ax0, k4, a4);
    theta = th0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    aux = has_aux ? VectorXd(ax0 + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)) : ax0;
  }

  Triggers classify(const VectorXd& theta, const VectorXd& mis_start) const {
    Triggers tr;
    const VectorXd mis = mismatch(theta);
    boundary_triggers(theta, mis, L_, tr);
    if (eq_) {
      for (int l = 0; l < m_; ++l) {
        if (sliding_[static_cast<std::size_t>(l)]) continue;
        const double a = mis_start(l);
        if (std::abs(a) <= cfg_.sliding_band) continue;
        const double b = mis(l);
        if (std::abs(b) <= cfg_.sliding_band || (a > 0.0) != (b > 0.0)) tr.entries.push_back(l);
      }
    }
    return tr;
  }

  void step() {
    double target = cfg_.t_end;
    for (double bp : breakpoints_) {
      if (bp > t_ + kTimeEps) {
        target = std::min(target, bp);
        break;
      }
    }
    const double h = std::min(cfg_.step_h, target - t_);
    const bool lands = h == target - t_;
    const VectorXd mis_start = mismatch(x_.theta);
    if (eq_) lock_sides(mis_start);

    VectorXd th, ax;
    rk4(t_, h, th, ax);
    if (!th.allFinite())
      throw IntegratorError(IntegratorError::Kind::EscapedStateSpace,
                            "non-finite state at t=" + std::to_string(t_) + ": integrator step too large");
    Triggers tr = classify(th, mis_start);
    if (!tr.any()) {
      t_ = lands ? target : t_ + h;
      x_.theta = std::move(th);
      x_.aux = std::move(ax);
      ++flow_steps_;
      if (flow_steps_ % cfg_.record_every == 0 || t_ >= cfg_.t_end - kTimeEps) record("");
      return;
    }

    double lo = 0.0;
    double hi = 1.0;
    VectorXd th_hi = th, ax_hi = ax;
    while ((hi - lo) * h > cfg_.event_tol) {
      const double mid = 0.5 * (lo + hi);
      VectorXd tm, am;
      rk4(t_, mid * h, tm, am);
      Triggers tm_tr = classify(tm, mis_start);
      if (tm_tr.any()) {
        hi = mid;
        th_hi = std::move(tm);
        ax_hi = std::move(am);
        tr = std::move(tm_tr);
      } else {
        lo = mid;
      }
    }
    if (tr.edges.empty() && !tr.nodes.empty() && hi < 1.0) {
      const double s2 = std::min(1.0, hi + cfg_.event_tol / h);
      VectorXd t2, a2;
      rk4(t_, s2 * h, t2, a2);
      Triggers tr2 = classify(t2, mis_start);
      if (!tr2.edges.empty()) {
        hi = s2;
        th_hi = std::move(t2);
        ax_hi = std::move(a2);
        tr = std::move(tr2);
      }
    }

    VectorXd rate, arate;
    rhs(t_, x_.theta, x_.aux, rate, arate);
    t_ = (hi == 1.0 && lands) ? target : t_ + hi * h;
    x_.theta = std::move(th_hi);
    x_.aux = std::move(ax_hi);
    ++flow_steps_;

    const double allowed = 2.0 * h * (1.0 + inf_norm(rate)) + 1e-8;
    for (int i : tr.nodes) {
      const double over = std::abs(x_.theta(i)) - L_;
      if (over > allowed) {
        std::ostringstream os;
        os << "state escaped X by " << over << " at node " << i + 1 << ", t=" << t_
           << ": integrator step too large for the boundary crossing";
        throw IntegratorError(IntegratorError::Kind::EscapedStateSpace, os.str());
      }
      x_.theta(i) = std::copysign(L_, x_.theta(i));
    }
    if (!tr.entries.empty()) update_sliding(tr.entries);
    record("");
  }

  /// While a step is located, each non-sliding edge keeps the coupling branch of the side
  /// it started on, so the flow is smooth in the step fraction.
  void lock_sides(const VectorXd& mis) {
    for (int l = 0; l < m_; ++l) {
      const auto ul = static_cast<std::size_t>(l);
      if (mis(l) != 0.0) {
        side_[ul] = mis(l) > 0.0 ? 1 : -1;
      } else if (!std::isnan(exit_value_[ul]) && exit_value_[ul] != 0.0) {
        side_[ul] = exit_value_[ul] > 0.0 ? 1 : -1;
      } else {
        side_[ul] = 0;
      }
    }
  }

  void update_sliding(const std::vector<int>& entering = {}) {
    const VectorXd mis = mismatch(x_.theta);
    const std::vector<char> before = sliding_;
    for (int l : entering) {
      sliding_[static_cast<std::size_t>(l)] = 1;
      cache_dirty_ = true;
    }
    for (int l = 0; l < m_; ++l) {
      const auto ul = static_cast<std::size_t>(l);
      if (sliding_[ul]) continue;
      if (std::abs(mis(l)) <= cfg_.sliding_band) {
        sliding_[ul] = 1;
        cache_dirty_ = true;
      } else {
        exit_value_[ul] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    while (any_sliding()) {
      model_->omega(t_, x_.theta, x_.aux, omega_buf_);
      outer_sigma(mis, sig_buf_);
      const VectorXd s = sliding_sigma(omega_buf_, sig_buf_);
      Eigen::Index worst = 0;
      const double excess = s.cwiseAbs().maxCoeff(&worst) - r0_;
      if (excess <= 1e-12 * std::max(1.0, r0_)) break;
      const int l = s_idx_[static_cast<std::size_t>(worst)];
      sliding_[static_cast<std::size_t>(l)] = 0;
      exit_value_[static_cast<std::size_t>(l)] = std::clamp(s(worst), -r0_, r0_);
      cache_dirty_ = true;
    }
    for (int l = 0; l < m_; ++l) {
      const auto ul = static_cast<std::size_t>(l);
      if (sliding_[ul] && !before[ul]) {
        ++trace_.sliding_entries;
        exit_value_[ul] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    if (!any_sliding()) return;
    refresh_sliding_cache();
    VectorXd mis_s(static_cast<Eigen::Index>(s_idx_.size()));
    for (std::size_t k = 0; k < s_idx_.size(); ++k) mis_s(static_cast<Eigen::Index>(k)) = mis(s_idx_[k]);
    if (mis_s.cwiseAbs().maxCoeff() == 0.0) return;
    x_.theta -= bs_ * gram_.solve(mis_s);
    for (Eigen::Index i = 0; i < n_; ++i) x_.theta(i) = std::clamp(x_.theta(i), -L_, L_);
  }

  void jump_to(JumpKind kind, int index, std::vector<HybridState> posts, std::string tag) {
    if (static_cast<int>(trace_.jump_events.size()) >= cfg_.max_jumps) {
      std::ostringstream os;
      os << "max_jumps (" << cfg_.max_jumps << ") exceeded at t=" << t_
         << ": Zeno-like accumulation of jumps is a numerical artifact (solutions have an average dwell time); "
            "check step_h and event_tol";
      throw IntegratorError(IntegratorError::Kind::MaxJumps, os.str());
    }
    JumpEvent ev;
    ev.kind = kind;
    ev.index = index;
    ev.pre = x_;
    ev.post = std::move(posts);
    ev.t = t_;
    ev.j = j_;
    x_ = ev.post.front();
    trace_.jump_events.push_back(std::move(ev));
    ++j_;
    if (kind == JumpKind::EdgeUnwind && std::abs(mismatch(x_.theta)(index)) >= L_)
      throw IntegratorError(IntegratorError::Kind::EscapedStateSpace,
                            "post-jump mismatch on the jump-set boundary at t=" + std::to_string(t_));
    record(std::move(tag));
  }

  void process_jumps() {
    const double delta = spec_.delta();
    while (true) {
      const auto edges = enabled_edge_jumps(x_, g_, delta);
      if (!edges.empty()) {
        const int l = edges.front();
        jump_to(JumpKind::EdgeUnwind, l, jump_G_ij(x_, g_, l, delta), edge_tag(g_, l));
        continue;
      }
      const auto nodes = enabled_phase_wraps(x_, g_, delta);
      if (!nodes.empty()) {
        const int i = nodes.front();
        jump_to(JumpKind::PhaseWrap, i, {jump_g_i(x_, g_, i, delta)}, "wrap:" + std::to_string(i + 1));
        continue;
      }
      break;
    }
  }

  void record(std::string event) {
    TraceSample s;
    s.t = t_;
    s.j = j_;
    s.x = x_;
    const VectorXd mis = mismatch(x_.theta);
    s.V = lyapunov_V(mis, spec_);
    s.mismatch_inf = inf_norm(mis);
    s.event = std::move(event);
    trace_.samples.push_back(std::move(s));
  }

  void finish() {
    DwellStats& d = trace_.dwell;
    d.jump_count = static_cast<int>(trace_.jump_events.size());
    d.flow_time = t_;
    d.jump_density = t_ > 0.0 ? d.jump_count / t_ : 0.0;
    int burst = 0;
    for (std::size_t k = 0; k < trace_.jump_events.size(); ++k) {
      burst = (k > 0 && trace_.jump_events[k].t == trace_.jump_events[k - 1].t) ? burst + 1 : 1;
      d.max_burst = std::max(d.max_burst, burst);
    }
  }

  const ScenarioConfig& sc_;
  IntegratorConfig cfg_;
  const GeneralGraph& g_;
  const MatrixXd& B_;
  const CouplingSpec& spec_;
  double kappa_;
  double L_;
  std::shared_ptr<const FrequencyModel> model_;
  int n_;
  int m_;
  std::vector<double> breakpoints_;
  bool eq_ = false;
  double r0_ = 0.0;
  std::vector<char> sliding_;
  std::vector<double> exit_value_;
  std::vector<int> side_;

  mutable bool cache_dirty_ = true;
  mutable std::vector<int> s_idx_;
  mutable MatrixXd bs_;
  mutable Eigen::LDLT<MatrixXd> gram_;
  mutable VectorXd omega_buf_;
  mutable VectorXd sig_buf_;

  HybridState x_;
  double t_ = 0.0;
  int j_ = 0;
  long flow_steps_ = 0;
  SolutionTrace trace_;
};

}  // namespace

SolutionTrace simulate(const ScenarioConfig& scenario, const IntegratorConfig& cfg) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw IntegratorError(IntegratorError::Kind::InvalidInput, e.what());
  }
  Engine engine(scenario, cfg);
  return engine.run();
}

std::optional<BoundaryCrossing> detect_boundary(const std::function<HybridState(double)>& path,
                                                const GeneralGraph& graph, double delta, double tol) {
  const double L = kPi + delta;
  auto triggers = [&](double s) {
    const HybridState x = path(s);
    Triggers tr;
    boundary_triggers(x.theta, mismatch_vector(x, graph), L, tr);
    return tr;
  };
  Triggers tr = triggers(1.0);
  if (!tr.any()) return std::nullopt;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    Triggers t_mid = triggers(mid);
    if (t_mid.any()) {
      hi = mid;
      tr = std::move(t_mid);
    } else {
      lo = mid;
    }
  }
  if (tr.edges.empty()) {
    Triggers late = triggers(std::min(1.0, hi + tol));
    if (!late.edges.empty()) tr = std::move(late);
  }
  BoundaryCrossing out;
  out.fraction = hi;
  if (!tr.edges.empty()) {
    out.kind = JumpKind::EdgeUnwind;
    out.index = tr.edges.front();
  } else {
    out.kind = JumpKind::PhaseWrap;
    out.index = tr.nodes.front();
  }
  return out;
}

std::optional<BoundaryCrossing> detect_boundary(const HybridState& x_prev, const HybridState& x_next,
                                                const GeneralGraph& graph, double delta, double tol) {
  return detect_boundary(
      [&](double s) {
        HybridState x = x_prev;
        x.theta = (1.0 - s) * x_prev.theta + s * x_next.theta;
        return x;
      },
      graph, delta, tol);
}

VectorXd equivalent_coupling(const GeneralGraph& graph, double kappa, const VectorXd& omega) {
  if (!graph.is_tree())
    throw IntegratorError(IntegratorError::Kind::InvalidInput, "equivalent coupling needs a tree (B^T B singular)");
  if (!(kappa > 0.0)) throw IntegratorError(IntegratorError::Kind::InvalidInput, "equivalent coupling needs kappa > 0");
  const MatrixXd& B = graph.incidence();
  const MatrixXd gram = kappa * (B.transpose() * B);
  return gram.ldlt().solve(B.transpose() * omega);
}

std::optional<VectorXd> sliding_step(const HybridState& x, double t, const ScenarioConfig& scenario,
                                     const IntegratorConfig& cfg) {
  const CouplingSpec& spec = scenario.coupling;
  if (cfg.sliding != SlidingMode::EquivalentControl)
    throw IntegratorError(IntegratorError::Kind::InvalidInput, "sliding_step requires equivalent_control mode");
  if (!spec.discontinuous_at_zero())
    throw IntegratorError(IntegratorError::Kind::InvalidInput, "sliding_step requires sigma discontinuous at 0");
  const VectorXd mis = mismatch_vector(x, scenario.graph);
  if (mis.size() > 0 && mis.cwiseAbs().maxCoeff() > cfg.sliding_band)
    throw IntegratorError(IntegratorError::Kind::InvalidInput, "sliding_step requires max|theta_tilde| <= sliding_band");
  VectorXd omega;
  scenario.frequency_model()->omega(t, x.theta, x.aux, omega);
  const VectorXd sigma = equivalent_coupling(scenario.graph, scenario.kappa, omega);
  const double r0 = std::abs(spec.right_limit_at_zero());
  if (sigma.size() > 0 && sigma.cwiseAbs().maxCoeff() > r0 * (1.0 + 1e-12)) return std::nullopt;
  return VectorXd(omega - scenario.kappa * (scenario.graph.incidence() * sigma));
}

DwellEnvelope dwell_stats(const SolutionTrace& trace) {
  DwellEnvelope env;
  std::vector<double> times;
  times.reserve(trace.jump_events.size());
  for (const JumpEvent& e : trace.jump_events) times.push_back(e.t);
  const std::size_t J = times.size();
  int burst = 0;
  int j0 = 0;
  for (std::size_t k = 0; k < J; ++k) {
    burst = (k > 0 && times[k] == times[k - 1]) ? burst + 1 : 1;
    j0 = std::max(j0, burst);
  }
  env.j0 = j0;
  for (std::size_t a = 0; a < J; ++a) {
    for (std::size_t b = a + static_cast<std::size_t>(j0); b < J; ++b) {
      const double count = static_cast<double>(b - a + 1);
      env.tau_d = std::min(env.tau_d, (times[b] - times[a]) / (count - j0));
    }
  }
  if (!(env.tau_d > 0.0)) {
    env.holds = false;
    return env;
  }
  for (std::size_t a = 0; a < J && env.holds; ++a) {
    for (std::size_t b = a; b < J; ++b) {
      const double count = static_cast<double>(b - a + 1);
      const double allowed = std::isinf(env.tau_d) ? env.j0 : (times[b] - times[a]) / env.tau_d + env.j0;
      if (count > allowed + 1e-9 * count) {
        env.holds = false;
        break;
      }
    }
  }
  return env;
}

double chatter_tolerance(double kappa, double c, int num_edges, double step_h) {
  return 2.0 * kappa * c * std::sqrt(static_cast<double>(num_edges)) * step_h;
}

}  // namespace hysync
