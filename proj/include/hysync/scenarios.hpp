#ifndef HYSYNC_SCENARIOS_HPP_
#define HYSYNC_SCENARIOS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hysync/config.hpp"
#include "hysync/coupling.hpp"
#include "hysync/dynamics.hpp"
#include "hysync/graph.hpp"
#include "hysync/types.hpp"

namespace hysync {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class OmegaModel { ConstantVector, FirstOrderGrid, SecondOrderGrid, Custom };

std::string_view to_string(OmegaModel model);
OmegaModel parse_omega_model(std::string_view name);

/// Sign convention of the all-to-all sine coupling inside omega_i.
///  - Attractive: -sum_j k_ij sin(theta_i - theta_j + phi_ij)  (synchronizing)
///  - AsPrinted:  -sum_j k_ij sin(theta_j - theta_i + phi_ij)  (desynchronizing)
enum class PhysicalCoupling { Attractive, AsPrinted };

std::string_view to_string(PhysicalCoupling convention);
PhysicalCoupling parse_physical_coupling(std::string_view name);

/// Sampled constants of the power-grid frequency models.
struct GridParams {
  VectorXd chi;          ///< uni[-1, 1]
  VectorXd omega_tilde;  ///< uni[-5, 5]
  VectorXd phi;          ///< uni[0, atan(0.25)]
  VectorXd zeta;         ///< uni[20, 30] / (120 pi)
  VectorXd mass;         ///< uni[2, 12] / (120 pi); second order only
  MatrixXd kappa_tilde;  ///< symmetric, uni[0.7, 1.2] off the diagonal
  MatrixXd phi_pair;     ///< uni[0, atan(0.25)] for every ordered pair
  PhysicalCoupling convention = PhysicalCoupling::Attractive;

  int size() const { return static_cast<int>(chi.size()); }

  /// Samples every constant from its own stream (see ParameterStreams).
  static GridParams sample(std::uint64_t seed, int n, bool second_order,
                           PhysicalCoupling convention = PhysicalCoupling::Attractive);
  /// All values inside their closed supports.
  bool within_supports() const;
};

inline constexpr double kDisturbanceStart = 5.2;
inline constexpr double kDisturbanceStop = 6.0;
inline constexpr double kDisturbanceAmplitude = 5.0;

/// d_i(t) = 5 sin(50 chi_i t + phi_i) on (5.2, 6), zero elsewhere.
double disturbance_d(int i, double t, const GridParams& params);
double disturbance_d(double t, double chi, double phi);

/// Heterogeneous generalized natural frequencies omega(theta, t), possibly with
/// internal state (the second-order model integrates omega itself as aux).
class FrequencyModel {
 public:
  virtual ~FrequencyModel() = default;

  virtual int aux_dim() const { return 0; }
  virtual void omega(double t, const VectorXd& theta, const VectorXd& aux, VectorXd& out) const = 0;
  virtual void aux_rate(double /*t*/, const VectorXd& /*theta*/, const VectorXd& /*aux*/, VectorXd& out) const {
    out.resize(0);
  }
  /// [omega_m, omega_M] containing every omega_i along every solution.
  virtual Interval bounds() const = 0;
  /// Times where omega is discontinuous in t; steps never straddle these.
  virtual std::vector<double> breakpoints() const { return {}; }
};

class ConstantFrequencies final : public FrequencyModel {
 public:
  explicit ConstantFrequencies(VectorXd values) : values_(std::move(values)) {}
  void omega(double, const VectorXd&, const VectorXd&, VectorXd& out) const override { out = values_; }
  Interval bounds() const override;

 private:
  VectorXd values_;
};

/// omega_i = (1/zeta_i)(w_i (1 + 0.3 sin(chi_i t + phi_i)) + d_i(t) - physical coupling).
class FirstOrderGridFrequencies final : public FrequencyModel {
 public:
  explicit FirstOrderGridFrequencies(GridParams params) : p_(std::move(params)) {}
  void omega(double t, const VectorXd& theta, const VectorXd& aux, VectorXd& out) const override;
  Interval bounds() const override;
  std::vector<double> breakpoints() const override { return {kDisturbanceStart, kDisturbanceStop}; }

  /// Bracket of the bracketed forcing term w_i(...) + d_i - coupling, per node.
  static Interval forcing_bounds(const GridParams& p, int i);
  /// The bracketed forcing term itself.
  static double forcing(const GridParams& p, int i, double t, const VectorXd& theta);

 private:
  GridParams p_;
};

/// d omega_i / dt = -(zeta_i/m_i) omega_i + (1/m_i) forcing_i; omega is carried as aux.
class SecondOrderGridFrequencies final : public FrequencyModel {
 public:
  SecondOrderGridFrequencies(GridParams params, VectorXd omega0) : p_(std::move(params)), omega0_(std::move(omega0)) {}
  int aux_dim() const override { return p_.size(); }
  void omega(double, const VectorXd&, const VectorXd& aux, VectorXd& out) const override { out = aux; }
  void aux_rate(double t, const VectorXd& theta, const VectorXd& aux, VectorXd& out) const override;
  /// Forward-invariant box: omega_i stays between omega_i(0) and forcing bounds / zeta_i.
  Interval bounds() const override;
  std::vector<double> breakpoints() const override { return {kDisturbanceStart, kDisturbanceStop}; }

 private:
  GridParams p_;
  VectorXd omega0_;
};

/// Caller-supplied omega(theta, t) for in-process experiments.
class CustomFrequencies final : public FrequencyModel {
 public:
  using Fn = std::function<void(double, const VectorXd&, VectorXd&)>;
  CustomFrequencies(Fn fn, Interval bounds, std::vector<double> breakpoints = {})
      : fn_(std::move(fn)), bounds_(bounds), breakpoints_(std::move(breakpoints)) {}
  void omega(double t, const VectorXd& theta, const VectorXd&, VectorXd& out) const override { fn_(t, theta, out); }
  Interval bounds() const override { return bounds_; }
  std::vector<double> breakpoints() const override { return breakpoints_; }

 private:
  Fn fn_;
  Interval bounds_;
  std::vector<double> breakpoints_;
};

struct ScenarioConfig {
  std::string id = "scenario";
  OmegaModel omega_model = OmegaModel::ConstantVector;
  GeneralGraph graph;
  CouplingSpec coupling;
  double kappa = 1.0;
  std::uint64_t seed = 0;
  /// Sign convention of the grid models' physical coupling.
  PhysicalCoupling physical_coupling = PhysicalCoupling::Attractive;
  /// Grid models: sampled from seed. Empty otherwise.
  std::optional<GridParams> params;
  /// ConstantVector model.
  VectorXd constant_omega;
  /// Custom model.
  std::shared_ptr<const FrequencyModel> custom_model;
  HybridState initial;
  IntegratorConfig integrator;

  int num_nodes() const { return graph.num_nodes(); }
  int num_edges() const { return graph.num_edges(); }
  double delta() const { return coupling.delta(); }

  std::shared_ptr<const FrequencyModel> frequency_model() const;
  /// Smallest eigenvalue of B^T B (0 with diagnostic for cyclic graphs).
  SpectrumReport spectrum() const { return lambda_min(graph.incidence()); }

  /// Throws ScenarioError naming the first violated requirement.
  void validate() const;
};

struct GridOptions {
  CouplingSpec coupling = CouplingSpec::sign(kPi / 4.0);
  double kappa = 576.0 * kPi / 10.0;
  double t_end = 11.0;
  PhysicalCoupling convention = PhysicalCoupling::Attractive;
};

/// theta_i(0) = -pi + 2 pi i / n (0-based i).
VectorXd equally_spaced_initial(int n, double delta);

ScenarioConfig first_order_grid(std::uint64_t seed, int n, const OrientedTree& tree, const GridOptions& options = {});
ScenarioConfig second_order_grid(std::uint64_t seed, int n, const OrientedTree& tree,
                                 const GridOptions& options = {});

/// Three-node cycle, delta = 3 pi / 4, omega = 0, x(0) = (-2pi/3, 0, 2pi/3, 0, 0, 1).
ScenarioConfig counterexample_scenario(double kappa = 1.0, std::optional<CouplingSpec> coupling = std::nullopt);

/// Rebuild grid parameters after seed / size / convention changes.
void resample_grid_params(ScenarioConfig& config);

}  // namespace hysync

#endif  // HYSYNC_SCENARIOS_HPP_
