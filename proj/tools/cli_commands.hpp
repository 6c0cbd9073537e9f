#ifndef HYSYNC_TOOLS_CLI_COMMANDS_HPP_
#define HYSYNC_TOOLS_CLI_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hysync/config.hpp"
#include "hysync/scenarios.hpp"

namespace hysync::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidationFailure = 2,
  kIntegratorFailure = 3,
  kAuditFailure = 4,
};

struct Overrides {
  /// sign, ramp, sine_plus_ramp, or table:<path>.
  std::optional<std::string> sigma;
  std::optional<double> kappa;
  std::optional<double> delta;
  std::optional<double> step;
  std::optional<double> t_end;
  std::optional<SlidingMode> sliding;
  std::optional<std::uint64_t> seed;
  std::optional<int> record_every;
  bool no_coupling = false;
};

struct RunManifest {
  std::filesystem::path scenario;
  Overrides overrides;
  std::filesystem::path out_dir;
  bool radial = false;
};

/// --out, else $HYSYNC_OUT, else ./hysync_out.
std::filesystem::path default_out_dir(const std::optional<std::string>& flag);

/// Applies overrides and re-validates. Throws ScenarioError.
ScenarioConfig apply_overrides(ScenarioConfig scenario, const Overrides& o);

/// Writes <id>.trace.csv, <id>.audit.txt, optional <id>.radial.csv and appends to results.csv.
int cmd_run(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Coupling (odd / sector check on 10^4 points) and/or graph (tree, lambda_min) report.
int cmd_validate(const std::filesystem::path& path, std::optional<double> delta, std::ostream& out, std::ostream& err);

struct SweepRequest {
  RunManifest base;
  /// Numbers, or multiples of kappa_star such as "kstar", "0.5kstar", "2kstar".
  std::vector<std::string> kappas;
  std::vector<std::string> sigmas;
  unsigned threads = 0;
};

/// Runs every (sigma, kappa) variant concurrently; writes sweep.csv and prints trend summaries.
int cmd_sweep(const SweepRequest& request, std::ostream& out, std::ostream& err);

/// Re-audits a trace CSV against its scenario.
int cmd_audit(const std::filesystem::path& trace, const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Full command line; returns the exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hysync::cli

#endif  // HYSYNC_TOOLS_CLI_COMMANDS_HPP_
