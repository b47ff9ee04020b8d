#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nsch/grid.hpp"
#include "nsch/scenarios.hpp"
#include "nsch/solver.hpp"
#include "nsch/state.hpp"

namespace nsch {

enum class RunMode { Run, Scenario, Sweep, Convergence };

enum class InitialKind { Constant, Perturbed, Noise };

/// Flat form of an InitialCondition; modes are written `field:wave:amplitude:phase`.
struct InitialSpec {
  InitialKind kind = InitialKind::Constant;
  ConstantIC base;
  std::vector<Mode> modes;
  double amplitude = 1e-4;
  std::uint64_t seed = 1;

  InitialCondition build() const;
};

struct RunConfig {
  double length = 1.0;
  int cells = 256;
  Boundary bc = Boundary::Periodic;

  Params params;
  RunControls controls;

  InitialSpec initial;

  double t_end = 1.0;

  std::string directory = "out";
  int record_every = 1;
  std::vector<double> snapshot_times;

  RunMode mode = RunMode::Run;
  std::string scenario;                // RunMode::Scenario
  std::string sweep_key;               // RunMode::Sweep, any numeric key such as params.lambda
  std::vector<double> sweep_values;    // RunMode::Sweep

  Grid grid() const { return Grid(length, cells, bc); }
  /// The run as a Scenario (name taken from the output directory).
  nsch::Scenario as_scenario() const;
};

/// Parses the line-oriented `section.key = value` format. `#` starts a comment.
/// Every key not given keeps its default. Throws ConfigError with the line
/// number on syntax errors, unknown or duplicate keys, and with the key name
/// on validation failures.
RunConfig parse_config(std::string_view text);

/// Reads and parses a file; ConfigError names the path when it cannot be read.
RunConfig load_config(const std::string& path);

/// Every key with its effective value, in a form parse_config accepts and
/// maps back to the same RunConfig.
std::string echo_config(const RunConfig& config);

/// Applies `key = value` on top of an existing config, as a sweep does.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

std::vector<std::string> config_keys();

}  // namespace nsch
