#ifndef HYSYNC_SCENARIO_IO_HPP_
#define HYSYNC_SCENARIO_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "hysync/scenarios.hpp"

namespace hysync {

/// Parse or semantic error, prefixed with "source:line:" when the location is known.
class ScenarioIoError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

/// TOML scenario. Top level: id, model (constant | first_order_grid | second_order_grid),
/// seed, nodes, edges (1-based pairs; trees are re-oriented, other graphs kept as given)
/// or tree = "path" | "star", kappa, physical_coupling, omega (constant model).
/// Tables: [coupling] family, delta, w, s/values or table (file path),
/// [initial] theta (array or "equally_spaced"), q, aux,
/// [integrator] step_h, event_tol, t_end, max_jumps, sliding, sliding_band, record_every.
/// Angles accept numbers or strings such as "pi/4" and "3pi/4".
ScenarioConfig parse_scenario(std::string_view text, const std::string& source = "<string>",
                              const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Fully explicit TOML (theta, q, aux written out; grid constants regenerate from seed).
std::string dump_scenario(const ScenarioConfig& scenario);
void save_scenario(const std::filesystem::path& path, const ScenarioConfig& scenario);

/// Standalone coupling and/or graph description for validation. TOML files carry the
/// coupling keys at top level or under [coupling], and nodes / edges / tree for a graph;
/// any other file is read as a two-column coupling table.
struct SpecFile {
  std::optional<CouplingSpec> coupling;
  std::optional<GeneralGraph> graph;
  /// Why the edge set is not a tree (graph then holds the edges as given).
  std::optional<std::string> tree_error;
};

SpecFile load_spec_file(const std::filesystem::path& path, double default_delta = kPi / 4.0);

/// "pi", "pi/4", "3pi/4", "3*pi/4", "-pi/2" or a plain number.
double parse_angle(std::string_view text);

}  // namespace hysync

#endif  // HYSYNC_SCENARIO_IO_HPP_
