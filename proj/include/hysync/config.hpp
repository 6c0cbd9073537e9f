#ifndef HYSYNC_CONFIG_HPP_
#define HYSYNC_CONFIG_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hysync {

/// How the simulator treats a coupling that is discontinuous at the origin.
///  - Chatter: plain fixed-step integration; mismatches oscillate in a band of
///    width about 2 kappa c sqrt(m) step_h around the synchronization set.
///  - EquivalentControl: edges whose mismatch reaches zero are held there by the
///    equivalent coupling value while it stays inside the regularized interval.
enum class SlidingMode { Chatter, EquivalentControl };

std::string_view to_string(SlidingMode mode);
/// Accepts "chatter", "equivalent_control" or "eqctl".
SlidingMode parse_sliding_mode(std::string_view name);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct IntegratorConfig {
  double step_h = 1e-3;
  double event_tol = 1e-10;
  double t_end = 11.0;
  int max_jumps = 100000;
  SlidingMode sliding = SlidingMode::Chatter;
  double sliding_band = 1e-8;
  /// Keep every k-th regular flow sample (event and jump rows are always kept).
  int record_every = 1;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

}  // namespace hysync

#endif  // HYSYNC_CONFIG_HPP_
