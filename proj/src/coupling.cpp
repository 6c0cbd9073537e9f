#include "hysync/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hysync {

namespace {

double sign_of(double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); }

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < kPi)) {
    throw CouplingError("delta must lie in (0, pi), got " + std::to_string(delta));
  }
}

double table_interp(const std::vector<double>& xs, const std::vector<double>& ys, double s) {
  auto it = std::upper_bound(xs.begin(), xs.end(), s);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const auto k = static_cast<std::size_t>(it - xs.begin());
  const double x0 = xs[k - 1], x1 = xs[k];
  const double t = (s - x0) / (x1 - x0);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

// sigma on the closed domain, no range check.
double sigma_raw(const CouplingSpec& spec, double s) {
  const double L = spec.half_width();
  switch (spec.family()) {
    case SigmaFamily::Sign:
      return sign_of(s);
    case SigmaFamily::Ramp:
      return s / L;
    case SigmaFamily::SinePlusRamp:
      return std::sin(s) + spec.weight() * s / L;
    case SigmaFamily::Table:
      if (s == 0.0) return 0.0;
      return s > 0.0 ? table_interp(spec.table_abscissae(), spec.table_values(), s)
                     : -table_interp(spec.table_abscissae(), spec.table_values(), -s);
  }
  return 0.0;
}

double simpson(const CouplingSpec& spec, double a, double b) {
  const double m = 0.5 * (a + b);
  return (b - a) / 6.0 *
         (eval_sigma_saturated(spec, a) + 4.0 * eval_sigma_saturated(spec, m) + eval_sigma_saturated(spec, b));
}

double adaptive_simpson(const CouplingSpec& spec, double a, double b, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = simpson(spec, a, m);
  const double right = simpson(spec, m, b);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return adaptive_simpson(spec, a, m, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(spec, m, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::string_view to_string(SigmaFamily family) {
  switch (family) {
    case SigmaFamily::Sign:
      return "sign";
    case SigmaFamily::Ramp:
      return "ramp";
    case SigmaFamily::SinePlusRamp:
      return "sine_plus_ramp";
    case SigmaFamily::Table:
      return "table";
  }
  return "unknown";
}

SigmaFamily parse_sigma_family(std::string_view name) {
  if (name == "sign") return SigmaFamily::Sign;
  if (name == "ramp") return SigmaFamily::Ramp;
  if (name == "sine_plus_ramp") return SigmaFamily::SinePlusRamp;
  if (name == "table" || name == "custom" || name == "custom-table") return SigmaFamily::Table;
  throw CouplingError("unknown coupling family '" + std::string(name) +
                      "' (expected sign, ramp, sine_plus_ramp or table)");
}

CouplingSpec CouplingSpec::sign(double delta) {
  check_delta(delta);
  CouplingSpec spec;
  spec.family_ = SigmaFamily::Sign;
  spec.delta_ = delta;
  return spec;
}

CouplingSpec CouplingSpec::ramp(double delta) {
  check_delta(delta);
  CouplingSpec spec;
  spec.family_ = SigmaFamily::Ramp;
  spec.delta_ = delta;
  return spec;
}

double CouplingSpec::min_sine_weight(double delta) {
  check_delta(delta);
  const double L = kPi + delta;
  // Only (pi, pi+delta] has sin(s) < 0 on the positive half of the domain.
  double worst = 0.0;
  constexpr int kSamples = 20000;
  for (int k = 0; k <= kSamples; ++k) {
    const double s = kPi + delta * k / kSamples;
    worst = std::max(worst, -std::sin(s) * L / s);
  }
  return worst;
}

CouplingSpec CouplingSpec::sine_plus_ramp(double delta, std::optional<double> weight) {
  check_delta(delta);
  CouplingSpec spec;
  spec.family_ = SigmaFamily::SinePlusRamp;
  spec.delta_ = delta;
  if (weight) {
    spec.weight_ = *weight;
  } else {
    const double w_min = min_sine_weight(delta);
    spec.weight_ = 0.5 > w_min * 1.01 ? 0.5 : 1.25 * w_min;
  }
  return spec;
}

CouplingSpec CouplingSpec::table(double delta, std::vector<double> abscissae, std::vector<double> values) {
  check_delta(delta);
  if (abscissae.size() != values.size() || abscissae.size() < 2) {
    throw CouplingError("coupling table needs at least two (s, value) rows");
  }
  const double L = kPi + delta;
  if (std::abs(abscissae.front()) > 1e-12) throw CouplingError("coupling table must start at s = 0");
  if (std::abs(abscissae.back() - L) > 1e-9 * L) {
    std::ostringstream os;
    os.precision(12);
    os << "coupling table must end at s = pi + delta = " << L << ", got " << abscissae.back();
    throw CouplingError(os.str());
  }
  for (std::size_t k = 1; k < abscissae.size(); ++k) {
    if (!(abscissae[k] > abscissae[k - 1])) throw CouplingError("coupling table abscissae must increase strictly");
  }
  abscissae.front() = 0.0;
  abscissae.back() = L;
  CouplingSpec spec;
  spec.family_ = SigmaFamily::Table;
  spec.delta_ = delta;
  spec.table_s_ = std::move(abscissae);
  spec.table_v_ = std::move(values);
  return spec;
}

CouplingSpec CouplingSpec::table_from_file(double delta, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CouplingError("cannot open coupling table '" + path.string() + "'");
  std::vector<double> xs, ys;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double s, v;
    if (!(row >> s)) continue;
    if (!(row >> v)) {
      throw CouplingError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    xs.push_back(s);
    ys.push_back(v);
  }
  try {
    CouplingSpec spec = table(delta, std::move(xs), std::move(ys));
    spec.table_path_ = path;
    return spec;
  } catch (const CouplingError& e) {
    throw CouplingError(path.string() + ": " + e.what());
  }
}

bool CouplingSpec::discontinuous_at_zero() const { return right_limit_at_zero() != 0.0; }

double CouplingSpec::right_limit_at_zero() const {
  switch (family_) {
    case SigmaFamily::Sign:
      return 1.0;
    case SigmaFamily::Table:
      return table_v_.front();
    default:
      return 0.0;
  }
}

double eval_sigma(const CouplingSpec& spec, double s) {
  if (!(std::abs(s) <= spec.half_width())) {
    std::ostringstream os;
    os.precision(17);
    os << "sigma evaluated at " << s << ", outside [-(pi+delta), pi+delta] with pi+delta = " << spec.half_width();
    throw DomainError(os.str());
  }
  return sigma_raw(spec, s);
}

double eval_sigma_saturated(const CouplingSpec& spec, double s) {
  const double L = spec.half_width();
  return sigma_raw(spec, std::clamp(s, -L, L));
}

Interval eval_krasovskii(const CouplingSpec& spec, double s) {
  const double value = eval_sigma(spec, s);
  if (s == 0.0 && spec.discontinuous_at_zero()) {
    const double r = spec.right_limit_at_zero();
    return {std::min(-r, r), std::max(-r, r)};
  }
  return {value, value};
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "oddness_defect: " << oddness_defect << (odd ? " (ok)" : " (FAIL)") << "\n";
  for (int l = 0; l < kLevels; ++l) {
    os << "sector_inf[eps=" << eps_levels[l] << "]: " << eps_infima[l] << (eps_infima[l] > 0.0 ? "" : " (FAIL)")
       << "\n";
  }
  if (first_violation) os << "sector_violation_at: |s| = " << *first_violation << "\n";
  os << "property1: " << (passed() ? "pass" : "fail") << "\n";
  return os.str();
}

ValidationReport validate_property1(const CouplingSpec& spec, int grid_points) {
  if (grid_points < 100) throw CouplingError("validation grid needs at least 100 points");
  const double L = spec.half_width();
  ValidationReport report;
  report.grid_points = grid_points;
  std::vector<double> lower(grid_points + 1);
  for (int k = 0; k <= grid_points; ++k) {
    const double s = L * k / grid_points;
    const double plus = eval_sigma(spec, s);
    const double minus = eval_sigma(spec, -s);
    report.oddness_defect = std::max(report.oddness_defect, std::abs(plus + minus));
    lower[k] = std::min(plus, -minus);
    if (k > 0 && lower[k] <= 0.0 && !report.first_violation) report.first_violation = s;
  }
  report.odd = report.oddness_defect <= 1e-12;
  report.sector = true;
  for (int l = 0; l < ValidationReport::kLevels; ++l) {
    const double eps = L * (l + 1) / ValidationReport::kLevels;
    const int first = static_cast<int>(std::ceil(static_cast<double>(grid_points) * (l + 1) / ValidationReport::kLevels - 1e-9));
    double inf = std::numeric_limits<double>::infinity();
    for (int k = std::max(first, 1); k <= grid_points; ++k) inf = std::min(inf, lower[k]);
    report.eps_levels[l] = eps;
    report.eps_infima[l] = inf;
    if (!(inf > 0.0)) report.sector = false;
  }
  return report;
}

std::optional<double> sector_mu(const CouplingSpec& spec) {
  if (!spec.discontinuous_at_zero()) return std::nullopt;
  double mu = std::abs(spec.right_limit_at_zero());
  if (spec.family() == SigmaFamily::Table) {
    for (double v : spec.table_values()) mu = std::min(mu, std::abs(v));
    return mu;
  }
  const double L = spec.half_width();
  constexpr int kGrid = 10000;
  for (int k = 1; k <= kGrid; ++k) {
    const double s = L * k / kGrid;
    mu = std::min({mu, std::abs(eval_sigma(spec, s)), std::abs(eval_sigma(spec, -s))});
  }
  return mu;
}

double sigma_sup_c(const CouplingSpec& spec) {
  switch (spec.family()) {
    case SigmaFamily::Sign:
    case SigmaFamily::Ramp:
      return 1.0;
    case SigmaFamily::Table: {
      double c = 0.0;
      for (double v : spec.table_values()) c = std::max(c, std::abs(v));
      return c;
    }
    case SigmaFamily::SinePlusRamp: {
      const double L = spec.half_width();
      constexpr int kGrid = 20000;
      int best = 0;
      double best_val = 0.0;
      for (int k = 0; k <= kGrid; ++k) {
        const double v = std::abs(eval_sigma(spec, L * k / kGrid));
        if (v > best_val) {
          best_val = v;
          best = k;
        }
      }
      // Golden-section refinement around the best grid cell.
      double a = L * std::max(0, best - 1) / kGrid;
      double b = L * std::min(kGrid, best + 1) / kGrid;
      const double g = (std::sqrt(5.0) - 1.0) / 2.0;
      for (int it = 0; it < 80; ++it) {
        const double x1 = b - g * (b - a), x2 = a + g * (b - a);
        if (std::abs(eval_sigma(spec, x1)) > std::abs(eval_sigma(spec, x2))) {
          b = x2;
        } else {
          a = x1;
        }
      }
      return std::max(best_val, std::abs(eval_sigma(spec, 0.5 * (a + b))));
    }
  }
  return 0.0;
}

double antiderivative(const CouplingSpec& spec, double z) {
  const double L = spec.half_width();
  const double a = std::abs(z);
  switch (spec.family()) {
    case SigmaFamily::Sign:
      return a;
    case SigmaFamily::Ramp:
      return a <= L ? a * a / (2.0 * L) : L / 2.0 + (a - L);
    case SigmaFamily::SinePlusRamp: {
      auto inner = [&](double x) { return 1.0 - std::cos(x) + spec.weight() * x * x / (2.0 * L); };
      return a <= L ? inner(a) : inner(L) + eval_sigma(spec, L) * (a - L);
    }
    case SigmaFamily::Table: {
      // Integrand is linear between knots; Simpson per knot interval.
      const auto& xs = spec.table_abscissae();
      const double upper = std::min(a, L);
      double total = 0.0;
      for (std::size_t k = 1; k < xs.size() && xs[k - 1] < upper; ++k) {
        const double lo = xs[k - 1], hi = std::min(xs[k], upper);
        total += adaptive_simpson(spec, lo, hi, simpson(spec, lo, hi), 1e-12, 30);
      }
      if (a > L) total += eval_sigma(spec, L) * (a - L);
      return total;
    }
  }
  return 0.0;
}

double antiderivative_quadrature(const CouplingSpec& spec, double z, double abs_tol) {
  if (z == 0.0) return 0.0;
  const double L = spec.half_width();
  const double sgn = z > 0.0 ? 1.0 : -1.0;
  const double a = std::abs(z);
  // Break points where the integrand may have kinks: the saturation limit and table knots.
  std::vector<double> breaks{0.0};
  if (spec.family() == SigmaFamily::Table) {
    for (double x : spec.table_abscissae()) {
      if (x > 0.0 && x < a) breaks.push_back(x);
    }
  }
  if (L < a) breaks.push_back(L);
  breaks.push_back(a);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t k = 1; k < breaks.size(); ++k) {
    const double lo = sgn * breaks[k - 1], hi = sgn * breaks[k];
    if (lo == hi) continue;
    // Nudge off the origin so the discontinuous families integrate their one-sided limit.
    const double lo_eval = (breaks[k - 1] == 0.0) ? sgn * std::numeric_limits<double>::denorm_min() : lo;
    total += adaptive_simpson(spec, lo_eval, hi, simpson(spec, lo_eval, hi), abs_tol, 50);
  }
  return total;
}

}  // namespace hysync
