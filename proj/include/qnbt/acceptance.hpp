#pragma once

#include <string>
#include <vector>

namespace qnbt::acceptance {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/* Runs the full release checklist in order. cli_path locates the command-line
   binary for the end-to-end determinism check; when empty that check fails
   with an explanatory detail rather than crashing. */
std::vector<CheckResult> run_all_checks(const std::string& cli_path);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace qnbt::acceptance
