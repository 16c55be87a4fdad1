#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"

#include "harness/config.h"

namespace totalctl::harness {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNotInvertible = 3,
  kExitNonConvergence = 4,
  kExitTargetsMissed = 5,
};

enum class Command { kSolve, kCertify, kOracle };

const char* to_string(Command command);

struct RunOptions {
  bool timing{true};
  std::optional<int> jobs;
  std::optional<std::string> out_dir;  ///< Beats the environment and the config.
  bool write_files{true};
};

struct RunResult {
  int code{kExitOk};
  std::string message;
  Json report;
  std::string report_path;  ///< Empty when nothing was written.
};

/// Output directory: options, then $TOTALCTL_OUT_DIR, then the config.
std::string resolve_output_dir(const RunConfig& config, const RunOptions& options);

/// Runs one command on a parsed configuration. Never throws for the
/// documented failure modes; they map to exit codes.
RunResult run_command(Command command, const RunConfig& config, const RunOptions& options);

/// Loads `config_path`, runs, reports failures on `err`, returns the exit code.
int run_file(Command command, const std::string& config_path, const RunOptions& options,
             std::ostream& out, std::ostream& err);

}  // namespace totalctl::harness
