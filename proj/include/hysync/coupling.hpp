#ifndef HYSYNC_COUPLING_HPP_
#define HYSYNC_COUPLING_HPP_

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hysync/types.hpp"

namespace hysync {

enum class SigmaFamily { Sign, Ramp, SinePlusRamp, Table };

std::string_view to_string(SigmaFamily family);
/// Accepts "sign", "ramp", "sine_plus_ramp", "table" (alias "custom").
SigmaFamily parse_sigma_family(std::string_view name);

class CouplingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside dom sigma = [-(pi+delta), pi+delta].
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Descriptor of the edge coupling function sigma on [-(pi+delta), pi+delta].
///
/// Built-in families:
///  - sign:            sigma(s) = sign(s), sigma(0) = 0
///  - ramp:            sigma(s) = s / (pi+delta)
///  - sine_plus_ramp:  sigma(s) = sin(s) + w s / (pi+delta)
///  - table:           odd extension of a sampled table on [0, pi+delta], linear between
///                     samples; a nonzero value at s = 0 is the right limit at the origin.
class CouplingSpec {
 public:
  CouplingSpec() = default;

  static CouplingSpec sign(double delta);
  static CouplingSpec ramp(double delta);
  /// Without an explicit weight the default 0.5 is used when it satisfies the sector
  /// condition for this delta, otherwise 1.25 times the smallest admissible weight.
  static CouplingSpec sine_plus_ramp(double delta, std::optional<double> weight = std::nullopt);
  static CouplingSpec table(double delta, std::vector<double> abscissae, std::vector<double> values);
  /// Two whitespace-separated columns (s, sigma(s)); '#' starts a comment.
  static CouplingSpec table_from_file(double delta, const std::filesystem::path& path);

  /// Smallest blend weight for which sin(s) + w s/(pi+delta) is sector bounded.
  static double min_sine_weight(double delta);

  SigmaFamily family() const { return family_; }
  double delta() const { return delta_; }
  /// pi + delta.
  double half_width() const { return kPi + delta_; }
  double weight() const { return weight_; }
  const std::vector<double>& table_abscissae() const { return table_s_; }
  const std::vector<double>& table_values() const { return table_v_; }
  /// Source file for table specs loaded from disk (empty otherwise).
  const std::filesystem::path& table_path() const { return table_path_; }

  bool discontinuous_at_zero() const;
  /// lim_{s -> 0+} sigma(s).
  double right_limit_at_zero() const;

  friend bool operator==(const CouplingSpec&, const CouplingSpec&) = default;

 private:
  SigmaFamily family_ = SigmaFamily::Ramp;
  double delta_ = kPi / 4.0;
  double weight_ = 0.0;
  std::vector<double> table_s_;
  std::vector<double> table_v_;
  std::filesystem::path table_path_;
};

/// Single-valued selection of sigma. Throws DomainError outside dom sigma.
double eval_sigma(const CouplingSpec& spec, double s);

/// sigma(sat_{pi+delta}(s)); defined on all of R.
double eval_sigma_saturated(const CouplingSpec& spec, double s);

/// Coupling vector for a mismatch vector, saturating arguments at the domain boundary.
template <typename Derived>
VectorXd sigma_vector(const CouplingSpec& spec, const Eigen::MatrixBase<Derived>& mismatch) {
  VectorXd out(mismatch.size());
  for (Eigen::Index l = 0; l < mismatch.size(); ++l) out(l) = eval_sigma_saturated(spec, mismatch(l));
  return out;
}

/// Krasovskii regularization: closed convex hull of the limit values of sigma at s.
Interval eval_krasovskii(const CouplingSpec& spec, double s);

struct ValidationReport {
  static constexpr int kLevels = 10;

  int grid_points = 0;
  double oddness_defect = 0.0;
  std::array<double, kLevels> eps_levels{};
  /// inf over grid |s| in [eps, pi+delta] of sign(s) sigma(s).
  std::array<double, kLevels> eps_infima{};
  /// Smallest grid |s| > 0 where sign(s) sigma(s) <= 0.
  std::optional<double> first_violation;
  bool odd = false;
  bool sector = false;

  bool passed() const { return odd && sector; }
  std::string summary() const;
};

/// Grid check of oddness (defect <= 1e-12) and positivity of the sector infima.
ValidationReport validate_property1(const CouplingSpec& spec, int grid_points);

/// Grid-certified mu with |sigma(s)| >= mu for s != 0; none when sigma is continuous at 0.
std::optional<double> sector_mu(const CouplingSpec& spec);

/// max over dom sigma of |sigma_hat|.
double sigma_sup_c(const CouplingSpec& spec);

/// Integral of sigma(sat_{pi+delta}(s)) from 0 to z, closed form for built-in families.
double antiderivative(const CouplingSpec& spec, double z);

/// Same integral by adaptive Simpson quadrature, independent of the closed forms.
double antiderivative_quadrature(const CouplingSpec& spec, double z, double abs_tol = 1e-12);

}  // namespace hysync

#endif  // HYSYNC_COUPLING_HPP_
