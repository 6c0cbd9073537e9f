#include "hysync/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hysync/rng.hpp"

namespace hysync {

namespace {

const double kPhiMax = std::atan(0.25);
constexpr double kZetaLo = 20.0 / (120.0 * kPi);
constexpr double kZetaHi = 30.0 / (120.0 * kPi);
constexpr double kMassLo = 2.0 / (120.0 * kPi);
constexpr double kMassHi = 12.0 / (120.0 * kPi);

bool inside(const VectorXd& v, double lo, double hi) {
  return v.size() == 0 || (v.minCoeff() >= lo && v.maxCoeff() <= hi);
}

}  // namespace

std::string_view to_string(OmegaModel model) {
  switch (model) {
    case OmegaModel::ConstantVector:
      return "constant";
    case OmegaModel::FirstOrderGrid:
      return "first_order_grid";
    case OmegaModel::SecondOrderGrid:
      return "second_order_grid";
    case OmegaModel::Custom:
      return "custom";
  }
  return "unknown";
}

OmegaModel parse_omega_model(std::string_view name) {
  if (name == "constant" || name == "constant-vector" || name == "constant_vector") return OmegaModel::ConstantVector;
  if (name == "first_order_grid") return OmegaModel::FirstOrderGrid;
  if (name == "second_order_grid") return OmegaModel::SecondOrderGrid;
  if (name == "custom") return OmegaModel::Custom;
  throw ScenarioError("unknown omega model '" + std::string(name) +
                      "' (expected constant, first_order_grid or second_order_grid)");
}

std::string_view to_string(PhysicalCoupling convention) {
  return convention == PhysicalCoupling::Attractive ? "attractive" : "as_printed";
}

PhysicalCoupling parse_physical_coupling(std::string_view name) {
  if (name == "attractive") return PhysicalCoupling::Attractive;
  if (name == "as_printed") return PhysicalCoupling::AsPrinted;
  throw ScenarioError("unknown physical coupling convention '" + std::string(name) +
                      "' (expected attractive or as_printed)");
}

GridParams GridParams::sample(std::uint64_t seed, int n, bool second_order, PhysicalCoupling convention) {
  const ParameterStreams rng(seed);
  GridParams p;
  p.convention = convention;
  p.chi.resize(n);
  p.omega_tilde.resize(n);
  p.phi.resize(n);
  p.zeta.resize(n);
  for (int i = 0; i < n; ++i) {
    p.chi(i) = rng.uniform("chi", -1.0, 1.0, i);
    p.omega_tilde(i) = rng.uniform("omega_tilde", -5.0, 5.0, i);
    p.phi(i) = rng.uniform("phi", 0.0, kPhiMax, i);
    p.zeta(i) = rng.uniform("zeta", kZetaLo, kZetaHi, i);
  }
  if (second_order) {
    p.mass.resize(n);
    for (int i = 0; i < n; ++i) p.mass(i) = rng.uniform("mass", kMassLo, kMassHi, i);
  }
  p.kappa_tilde = MatrixXd::Zero(n, n);
  p.phi_pair = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (i < j) {
        const double k = rng.uniform("kappa_tilde", 0.7, 1.2, i, j);
        p.kappa_tilde(i, j) = k;
        p.kappa_tilde(j, i) = k;
      }
      p.phi_pair(i, j) = rng.uniform("phi_pair", 0.0, kPhiMax, i, j);
    }
  }
  return p;
}

bool GridParams::within_supports() const {
  const int n = size();
  if (!inside(chi, -1.0, 1.0) || !inside(omega_tilde, -5.0, 5.0) || !inside(phi, 0.0, kPhiMax) ||
      !inside(zeta, kZetaLo, kZetaHi) || !inside(mass, kMassLo, kMassHi)) {
    return false;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (kappa_tilde(i, j) < 0.7 || kappa_tilde(i, j) > 1.2 || kappa_tilde(i, j) != kappa_tilde(j, i)) return false;
      if (phi_pair(i, j) < 0.0 || phi_pair(i, j) > kPhiMax) return false;
    }
  }
  return true;
}

double disturbance_d(double t, double chi, double phi) {
  if (t > kDisturbanceStart && t < kDisturbanceStop) {
    return kDisturbanceAmplitude * std::sin(50.0 * chi * t + phi);
  }
  return 0.0;
}

double disturbance_d(int i, double t, const GridParams& params) {
  return disturbance_d(t, params.chi(i), params.phi(i));
}

Interval ConstantFrequencies::bounds() const {
  if (values_.size() == 0) return {0.0, 0.0};
  return {values_.minCoeff(), values_.maxCoeff()};
}

double FirstOrderGridFrequencies::forcing(const GridParams& p, int i, double t, const VectorXd& theta) {
  const int n = p.size();
  double coupling = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double arg = p.convention == PhysicalCoupling::Attractive ? theta(i) - theta(j) : theta(j) - theta(i);
    coupling += p.kappa_tilde(i, j) * std::sin(arg + p.phi_pair(i, j));
  }
  return p.omega_tilde(i) * (1.0 + 0.3 * std::sin(p.chi(i) * t + p.phi(i))) + disturbance_d(i, t, p) - coupling;
}

Interval FirstOrderGridFrequencies::forcing_bounds(const GridParams& p, int i) {
  const double a = 0.7 * p.omega_tilde(i), b = 1.3 * p.omega_tilde(i);
  double coupling = 0.0;
  for (int j = 0; j < p.size(); ++j) {
    if (j != i) coupling += p.kappa_tilde(i, j);
  }
  const double spread = kDisturbanceAmplitude + coupling;
  return {std::min(a, b) - spread, std::max(a, b) + spread};
}

void FirstOrderGridFrequencies::omega(double t, const VectorXd& theta, const VectorXd&, VectorXd& out) const {
  const int n = p_.size();
  out.resize(n);
  for (int i = 0; i < n; ++i) out(i) = forcing(p_, i, t, theta) / p_.zeta(i);
}

Interval FirstOrderGridFrequencies::bounds() const {
  Interval box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < p_.size(); ++i) {
    const Interval f = forcing_bounds(p_, i);
    box.lo = std::min(box.lo, f.lo / p_.zeta(i));
    box.hi = std::max(box.hi, f.hi / p_.zeta(i));
  }
  return box;
}

void SecondOrderGridFrequencies::aux_rate(double t, const VectorXd& theta, const VectorXd& aux, VectorXd& out) const {
  const int n = p_.size();
  out.resize(n);
  for (int i = 0; i < n; ++i) {
    out(i) = (-p_.zeta(i) * aux(i) + FirstOrderGridFrequencies::forcing(p_, i, t, theta)) / p_.mass(i);
  }
}

Interval SecondOrderGridFrequencies::bounds() const {
  Interval box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < p_.size(); ++i) {
    const Interval f = FirstOrderGridFrequencies::forcing_bounds(p_, i);
    box.lo = std::min({box.lo, omega0_(i), f.lo / p_.zeta(i)});
    box.hi = std::max({box.hi, omega0_(i), f.hi / p_.zeta(i)});
  }
  return box;
}

std::shared_ptr<const FrequencyModel> ScenarioConfig::frequency_model() const {
  switch (omega_model) {
    case OmegaModel::ConstantVector:
      return std::make_shared<ConstantFrequencies>(constant_omega);
    case OmegaModel::FirstOrderGrid:
      if (!params) throw ScenarioError("first_order_grid scenario has no sampled parameters");
      return std::make_shared<FirstOrderGridFrequencies>(*params);
    case OmegaModel::SecondOrderGrid:
      if (!params) throw ScenarioError("second_order_grid scenario has no sampled parameters");
      return std::make_shared<SecondOrderGridFrequencies>(*params, initial.aux);
    case OmegaModel::Custom:
      if (!custom_model) throw ScenarioError("custom omega model not supplied");
      return custom_model;
  }
  return nullptr;
}

void ScenarioConfig::validate() const {
  const int n = num_nodes(), m = num_edges();
  if (n < 1) throw ScenarioError("scenario has no nodes");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ScenarioError("kappa must be a finite nonnegative number");
  try {
    integrator.validate();
  } catch (const ConfigError& e) {
    throw ScenarioError(std::string("integrator: ") + e.what());
  }
  const ValidationReport prop = validate_property1(coupling, 1000);
  if (!prop.passed()) {
    std::ostringstream os;
    os << "coupling '" << to_string(coupling.family()) << "' violates the odd/sector requirements";
    if (prop.first_violation) os << " (sign(s) sigma(s) <= 0 at |s| = " << *prop.first_violation << ")";
    if (!prop.odd) os << " (oddness defect " << prop.oddness_defect << ")";
    throw ScenarioError(os.str());
  }
  if (initial.theta.size() != n) {
    throw ScenarioError("initial theta has " + std::to_string(initial.theta.size()) + " entries, expected " +
                        std::to_string(n));
  }
  if (initial.q.size() != m) {
    throw ScenarioError("initial q has " + std::to_string(initial.q.size()) + " entries, expected " +
                        std::to_string(m));
  }
  if (!in_X(initial, delta())) throw ScenarioError("initial state is outside X = [-pi-delta, pi+delta]^n x {-1,0,1}^m");
  switch (omega_model) {
    case OmegaModel::ConstantVector:
      if (constant_omega.size() != n) throw ScenarioError("constant omega needs one value per node");
      break;
    case OmegaModel::FirstOrderGrid:
    case OmegaModel::SecondOrderGrid:
      if (!params || params->size() != n) throw ScenarioError("grid parameters missing or of the wrong size");
      if (!params->within_supports()) throw ScenarioError("grid parameters outside their uniform supports");
      if (omega_model == OmegaModel::SecondOrderGrid && params->mass.size() != n) {
        throw ScenarioError("second-order grid needs masses");
      }
      break;
    case OmegaModel::Custom:
      if (!custom_model) throw ScenarioError("custom omega model not supplied");
      break;
  }
  const int aux_dim = frequency_model()->aux_dim();
  if (initial.aux.size() != aux_dim) {
    throw ScenarioError("initial aux has " + std::to_string(initial.aux.size()) + " entries, expected " +
                        std::to_string(aux_dim));
  }
}

VectorXd equally_spaced_initial(int n, double delta) {
  if (n < 2) throw ScenarioError("equally spaced phases need n >= 2");
  if (!(delta > 0.0 && delta < kPi)) throw ScenarioError("delta must lie in (0, pi)");
  VectorXd theta(n);
  for (int i = 0; i < n; ++i) theta(i) = -kPi + kTwoPi * i / n;
  return theta;
}

namespace {

ScenarioConfig grid_common(std::uint64_t seed, int n, const OrientedTree& tree, const GridOptions& options,
                           bool second_order) {
  if (n < 2) throw ScenarioError("grid scenarios need n >= 2");
  if (tree.num_nodes() != n) throw ScenarioError("communication tree size does not match n");
  ScenarioConfig c;
  c.id = second_order ? "second_order_grid" : "first_order_grid";
  c.omega_model = second_order ? OmegaModel::SecondOrderGrid : OmegaModel::FirstOrderGrid;
  c.graph = tree;
  c.coupling = options.coupling;
  c.kappa = options.kappa;
  c.seed = seed;
  c.physical_coupling = options.convention;
  c.params = GridParams::sample(seed, n, second_order, options.convention);
  c.initial.theta = equally_spaced_initial(n, c.coupling.delta());
  c.initial.q = VectorXi::Zero(tree.num_edges());
  if (second_order) {
    const ParameterStreams rng(seed);
    c.initial.aux.resize(n);
    for (int i = 0; i < n; ++i) c.initial.aux(i) = rng.uniform("omega0", -0.1, 0.1, i);
  }
  c.integrator.t_end = options.t_end;
  return c;
}

}  // namespace

ScenarioConfig first_order_grid(std::uint64_t seed, int n, const OrientedTree& tree, const GridOptions& options) {
  return grid_common(seed, n, tree, options, false);
}

ScenarioConfig second_order_grid(std::uint64_t seed, int n, const OrientedTree& tree, const GridOptions& options) {
  return grid_common(seed, n, tree, options, true);
}

void resample_grid_params(ScenarioConfig& config) {
  const bool second = config.omega_model == OmegaModel::SecondOrderGrid;
  if (!second && config.omega_model != OmegaModel::FirstOrderGrid) return;
  const int n = config.num_nodes();
  config.params = GridParams::sample(config.seed, n, second, config.physical_coupling);
  if (second) {
    const ParameterStreams rng(config.seed);
    config.initial.aux.resize(n);
    for (int i = 0; i < n; ++i) config.initial.aux(i) = rng.uniform("omega0", -0.1, 0.1, i);
  }
}

ScenarioConfig counterexample_scenario(double kappa, std::optional<CouplingSpec> coupling) {
  constexpr double kDelta = 3.0 * kPi / 4.0;
  ScenarioConfig c;
  c.id = "counterexample";
  c.omega_model = OmegaModel::ConstantVector;
  c.graph = counterexample_graph();
  c.coupling = coupling.value_or(CouplingSpec::ramp(kDelta));
  if (c.coupling.delta() != kDelta) throw ScenarioError("the cyclic counterexample uses delta = 3 pi / 4");
  c.kappa = kappa;
  c.constant_omega = VectorXd::Zero(3);
  c.initial.theta = VectorXd(3);
  c.initial.theta << -2.0 * kPi / 3.0, 0.0, 2.0 * kPi / 3.0;
  c.initial.q = VectorXi(3);
  c.initial.q << 0, 0, 1;
  c.integrator.t_end = 10.0;
  return c;
}

}  // namespace hysync
