#include "hysync/config.hpp"

#include <cmath>
#include <string>

namespace hysync {

std::string_view to_string(SlidingMode mode) {
  return mode == SlidingMode::Chatter ? "chatter" : "equivalent_control";
}

SlidingMode parse_sliding_mode(std::string_view name) {
  if (name == "chatter") return SlidingMode::Chatter;
  if (name == "equivalent_control" || name == "eqctl") return SlidingMode::EquivalentControl;
  throw ConfigError("unknown sliding mode '" + std::string(name) + "' (chatter, equivalent_control, eqctl)");
}

void IntegratorConfig::validate() const {
  if (!(step_h > 0.0) || !std::isfinite(step_h)) throw ConfigError("step_h must be positive");
  if (!(event_tol > 0.0)) throw ConfigError("event_tol must be positive");
  if (!(event_tol < step_h)) throw ConfigError("event_tol must be smaller than step_h");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
  if (max_jumps <= 0) throw ConfigError("max_jumps must be positive");
  if (!(sliding_band >= 0.0)) throw ConfigError("sliding_band must be nonnegative");
  if (record_every < 1) throw ConfigError("record_every must be at least 1");
}

}  // namespace hysync
