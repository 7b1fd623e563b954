#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "slitbilliard/harness/config.hpp"
#include "slitbilliard/trapping.hpp"

namespace slitbilliard::harness {

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2, kNumeric = 3 };

struct Artifact {
  std::string name;
  std::string text;
};

struct CommandOutput {
  /// Result of the command's own checks; false maps to exit code 1.
  bool pass = true;
  /// Set when an orbit stopped on a numeric failure that the command could
  /// not exclude (exit code 3).
  bool numeric_failure = false;
  std::vector<std::string> summary;
  std::vector<Artifact> files;
};

struct RunOptions {
  /// Adds a creation time to every header (bodies are unaffected).
  bool timestamp = false;
  /// When set, long commands stream their summary lines here as they go.
  std::ostream* progress = nullptr;
};

struct RunResult {
  int exit_code = kPass;
  std::vector<std::string> summary;
  /// Paths written.
  std::vector<std::string> files;
};

/// Names accepted as experiment.command.
const std::vector<std::string>& command_names();
/// Commands whose results depend on the seed.
bool needs_seed(const ExperimentSpec& spec);

/// Validates every parameter, then computes in memory. Throws Error.
CommandOutput execute(const ParsedConfig& pc, const RunOptions& opt = {});

/// execute() plus file output into spec.out; errors become exit codes 2 or
/// 3 with the diagnostic as the only summary line.
RunResult run(const ParsedConfig& pc, const RunOptions& opt = {});

/// 2 for configuration and precondition errors, 3 for numeric ones.
int exit_code_for(const Error& e);

/// Comment lines with tool version, command, config and spec hashes, seed
/// and solver tolerances.
std::string artifact_header(const ParsedConfig& pc, const RunOptions& opt = {});
/// The text with its leading '#' lines removed.
std::string artifact_body(const std::string& text);

struct AtlasCheck {
  /// Adjacent cells of different kind within one cell of a boundary line.
  int edges = 0;
  /// Adjacent cells of different kind whose shared edge lies farther than
  /// one cell from both boundary lines.
  int stray_edges = 0;
  /// Adjacent cell pairs straddling a boundary line with equal kinds.
  int missed_edges = 0;
  int hyperbolic = 0;
  /// Hyperbolic cells outside the trapping region.
  int hyperbolic_outside = 0;
  bool pass() const { return edges > 0 && stray_edges == 0 && missed_edges == 0 && hyperbolic > 0 && hyperbolic_outside == 0; }
};

/// Compares an n x n scan of the built-in example walls with the boundary
/// lines lambda - x0 = 1/4, lambda + x0 = 3/4 and lambda + x0 = 7/4.
AtlasCheck check_example_atlas(const std::vector<AtlasRow>& rows, int n);

}  // namespace slitbilliard::harness
