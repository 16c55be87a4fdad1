#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "harness/run.h"
#include "harness/selftest.h"

namespace h = totalctl::harness;

int main(int argc, char** argv) {
  CLI::App app{"Steering controls and contraction certificates for delayed impulsive systems"};
  app.require_subcommand(1);

  std::string config_path;
  bool no_timing = false;
  int jobs = 0;
  std::string out_dir;

  auto add_run = [&](const std::string& name, const std::string& about) {
    auto* sub = app.add_subcommand(name, about);
    sub->add_option("config", config_path, "INI configuration file")->required();
    sub->add_flag("--no-timing", no_timing, "Omit wall-clock timings from the report");
    sub->add_option("--jobs", jobs, "Worker threads for Gramian assembly")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory (overrides TOTALCTL_OUT_DIR)");
    return sub;
  };
  auto* solve = add_run("solve", "Certify, solve and verify every target");
  auto* certify = add_run("certify", "Compute the certificate only");
  auto* oracle = add_run("oracle", "Solve a linear problem and emit the RK4 ground truth");

  auto* selftest = app.add_subcommand("selftest", "Run the acceptance criteria");
  std::vector<int> only;
  std::string scratch;
  selftest->add_option("--only", only, "Criterion ids to run")->check(CLI::Range(1, h::kCriterionCount));
  selftest->add_option("--scratch", scratch, "Scratch directory for the CLI contract check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitConfig;
  }

  if (selftest->parsed()) {
    h::SelftestOptions options;
    options.scratch_dir = scratch;
    return h::run_selftest(only, options, std::cout) == 0 ? 0 : 1;
  }

  h::RunOptions options;
  options.timing = !no_timing;
  if (jobs > 0) options.jobs = jobs;
  if (!out_dir.empty()) options.out_dir = out_dir;
  h::Command command = h::Command::kSolve;
  if (certify->parsed()) command = h::Command::kCertify;
  if (oracle->parsed()) command = h::Command::kOracle;
  (void)solve;
  return h::run_file(command, config_path, options, std::cout, std::cerr);
}
