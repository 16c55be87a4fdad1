#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace totalctl::harness {

struct CriterionResult {
  int id{0};
  std::string title;
  bool pass{false};
  std::string detail;
  double seconds{0.0};
};

struct SelftestOptions {
  std::string scratch_dir;  ///< Where the CLI contract check writes; temp when empty.
};

constexpr int kCriterionCount = 10;

CriterionResult run_criterion(int id, const SelftestOptions& options);

/// "PASS|FAIL criterion <id> <title>: <detail> [<seconds>s]"
std::string format_result(const CriterionResult& result);

/// Runs `ids` (all when empty), prints one line per criterion, returns the
/// number of failures.
int run_selftest(const std::vector<int>& ids, const SelftestOptions& options,
                 std::ostream& out);

}  // namespace totalctl::harness
