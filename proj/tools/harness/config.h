#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "totalctl/problem.h"
#include "totalctl/transport_example.h"

namespace totalctl::harness {

/// A malformed or inconsistent configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inline finite-dimensional problem: x' = Ax + Bu with constant history.
struct LinearSetup {
  Eigen::MatrixXd generator;
  Eigen::MatrixXd control;
  State initial;
  std::optional<double> semigroup_bound;  // computed from the generator when unset
  std::string impulse{"scale"};           // "scale": t*x, "zero": 0
  double gain{0.0};                       // delayed sine forcing, 0 disables
  std::vector<double> nonlocal_weights;
  std::vector<double> nonlocal_instants;
  double state_radius{10.0};
};

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
};

struct RunConfig {
  std::string example{"transport-case1"};
  TransportConfig transport;
  LinearSetup linear;
  std::optional<std::vector<State>> targets;
  std::uint64_t seed{20240611};
  TimeMesh mesh{{0.0, 0.3, 1.0}, {0.0, 0.5}, 1.0};
  NumericsConfig numerics;
  double tol_hit{1e-6};
  std::string output_dir{"out"};
  std::string prefix{"run"};
  std::vector<ConfigEntry> echo;  ///< Every key as written, in file order.
};

/// Parses INI text with sections [problem], [mesh], [numerics], [outputs].
/// Lists are whitespace separated; matrix rows are separated by ';'.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// The problem the configuration describes and its targets.
struct BuiltProblem {
  ProblemSpec problem;
  std::vector<State> targets;
};

/// Throws ConfigError when the pieces do not fit together.
BuiltProblem build_problem(const RunConfig& config);

std::vector<double> parse_list(const std::string& text, const std::string& field);
Eigen::MatrixXd parse_matrix(const std::string& text, const std::string& field);

}  // namespace totalctl::harness
