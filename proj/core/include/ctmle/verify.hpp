#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctmle {

struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double expected = 0.0;   // target value or bound
  double tolerance = 0.0;  // 0 means exact or one-sided
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool all_passed() const;
};

// suites: density, bellman, variance, decomposition, eluder, all
const std::vector<std::string>& verify_suite_names();

// Runs one named suite (or every suite for "all"). quick shrinks Monte
// Carlo budgets for interactive use; the thresholds stay the same because
// tolerances scale with the budget where it matters.
VerifyReport run_verify_suite(const std::string& suite, std::uint64_t seed,
                              bool quick);

std::string verify_report_json(const VerifyReport& report);

}  // namespace ctmle
