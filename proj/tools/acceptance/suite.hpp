#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace secjam::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteOptions {
  long long trials = 500;  // Monte-Carlo trials per experiment
  int workers = 1;
  std::vector<int> only;   // criterion ids to run; empty runs all
};

/// Runs the criteria, printing one PASS/FAIL line each as it finishes.
std::vector<CriterionResult> run_suite(const SuiteOptions& opts, std::ostream& out);

/// "PASS [id] name: detail (t s)".
std::string format_line(const CriterionResult& r);

}  // namespace secjam::acceptance
