#pragma once

// Experiment harness: JSON run configurations, the solve / sweep / simulate /
// validate / wait-aoii subcommands and their text outputs.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aoii/model.hpp"
#include "aoii/optimizer.hpp"
#include "aoii/rvi.hpp"
#include "aoii/sim.hpp"

namespace aoii {

struct SimSettings {
  std::uint64_t horizon = 100'000;
  std::uint64_t seed = 1;
  std::uint64_t n_reps = 1;
  unsigned threads = 1;
};

struct ValidateSettings {
  std::vector<double> lambdas{0.0, 1.0, 5.0, 20.0};
  std::vector<std::uint64_t> rate_thresholds{1, 2, 5, 10};
  /// Test hook: added to p_e on the closed-form side only.
  double perturb_gamma = 0.0;
};

/// Fully resolved run configuration.
struct RunConfig {
  SourceModel source;
  ChannelModel channel;
  Penalty penalty;
  std::vector<double> budgets;  ///< one entry for R, several for R_grid
  SolverConfig solver;
  SimSettings sim;
  RviConfig rvi;
  std::optional<Policy> policy;
  ValidateSettings validate;
  std::optional<std::string> out_path;
  /// Canonical JSON of every field after defaults were applied.
  std::string resolved;
};

/// Parses and validates a JSON configuration. Unknown keys, missing
/// physical parameters and malformed values raise ConfigError naming the
/// offending field.
RunConfig parse_config(std::string_view text);

/// Locale-independent, 12 significant digits.
std::string format_number(double x);

void cmd_solve(const RunConfig& cfg, std::ostream& out);
void cmd_sweep(const RunConfig& cfg, std::ostream& out);
void cmd_simulate(const RunConfig& cfg, std::ostream& out);
/// Returns true when every check passed.
bool cmd_validate(const RunConfig& cfg, std::ostream& out);
void cmd_wait_aoii(const RunConfig& cfg, std::ostream& out);

/// Column order of the sweep table.
extern const char* const kSweepHeader;

/// Entry point of the `aoii` executable. Exit codes: 0 success, 1 failed
/// validation, 2 configuration error, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aoii
