#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <vector>

#include "secjam/harness.hpp"
#include "suite.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria: one PASS/FAIL line per criterion"};
  secjam::acceptance::SuiteOptions opts;
  opts.workers = secjam::harness::default_workers();
  std::vector<int> expect_fail;
  app.add_option("--trials", opts.trials, "Monte-Carlo trials per experiment")->check(CLI::PositiveNumber);
  app.add_option("--workers", opts.workers, "Worker threads (default: SECJAM_WORKERS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--only", opts.only, "Criterion ids to run")->delimiter(',')->check(CLI::Range(1, 12));
  app.add_option("--expect-fail", expect_fail, "Criterion ids known to fail; exit 1 if one of them passes")
      ->delimiter(',')
      ->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  const auto results = secjam::acceptance::run_suite(opts, std::cout);
  int unexpected = 0, failed = 0;
  for (const auto& r : results) {
    const bool expected = std::find(expect_fail.begin(), expect_fail.end(), r.id) != expect_fail.end();
    if (!r.pass) ++failed;
    if (r.pass == expected) {
      ++unexpected;
      std::cout << "UNEXPECTED [" << r.id << "] " << (r.pass ? "passed but was expected to fail" : "failed") << '\n';
    }
  }
  std::cout << results.size() << " criteria evaluated, " << results.size() - static_cast<std::size_t>(failed)
            << " passed, " << failed << " failed\n";
  return unexpected == 0 ? 0 : 1;
}
