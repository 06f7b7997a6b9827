#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "secjam/harness.hpp"
#include "suite.hpp"

namespace {

namespace harness = secjam::harness;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFailureRate = 3;

struct RunArgs {
  std::string config;
  std::optional<long long> trials;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out;
  bool timing = false;
};

int do_run(const RunArgs& a) {
  harness::ExperimentConfig cfg;
  try {
    cfg = harness::load_config(a.config);
    if (a.trials) cfg.trials = *a.trials;
    if (a.seed) cfg.seed_base = *a.seed;
    cfg.validate();
  } catch (const secjam::scenario::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::ofstream file;
  std::ostream* csv = &std::cout;
  if (a.out != "-") {
    file.open(a.out, std::ios::out | std::ios::trunc);
    if (!file) {
      std::cerr << "cannot open '" << a.out << "' for writing\n";
      return kExitError;
    }
    csv = &file;
  }
  harness::RunOptions ro;
  ro.workers = a.workers;
  ro.timing = a.timing;
  ro.log = &std::cerr;
  const auto s = harness::run(cfg, ro, *csv);
  std::cerr << s.rows << " rows, " << s.failures << " failed of " << s.attempts << " evaluations";
  if (s.zero_forcing.checks > 0) {
    std::cerr << ", zero-forcing max residual " << s.zero_forcing.max_residual << " (" << s.zero_forcing.violations
              << " over 1e-10)";
  }
  std::cerr << '\n';
  if (s.failure_rate_exceeded) {
    std::cerr << "failure rate above " << ro.max_failure_rate * 100 << "%\n";
    return kExitFailureRate;
  }
  return kExitOk;
}

int do_plot(const std::string& in_path, const std::string& figure, const std::string& out_path,
            std::string image) {
  std::ifstream in(in_path);
  if (!in) {
    std::cerr << "cannot open '" << in_path << "'\n";
    return kExitError;
  }
  if (image.empty()) {
    const auto dot = out_path.find_last_of('.');
    image = (dot == std::string::npos ? out_path : out_path.substr(0, dot)) + ".png";
  }
  try {
    const auto rows = harness::read_csv(in);
    std::ofstream out(out_path, std::ios::out | std::ios::trunc);
    if (!out) {
      std::cerr << "cannot open '" << out_path << "' for writing\n";
      return kExitError;
    }
    harness::emit_plot_script(rows, figure, image, out);
  } catch (const harness::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const secjam::ArgumentError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo secrecy-rate experiments for jamming-assisted relaying"};
  app.require_subcommand(1);

  RunArgs run;
  run.workers = harness::default_workers();
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write CSV rows");
  run_cmd->add_option("--config", run.config, "Key-value experiment file")->required();
  run_cmd->add_option("--trials", run.trials, "Override the trial count")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "Override seed_base");
  run_cmd->add_option("--workers", run.workers, "Worker threads (default: SECJAM_WORKERS or 1)")
      ->check(CLI::Range(1, 1024));
  run_cmd->add_option("--out", run.out, "CSV path, or - for stdout")->required();
  run_cmd->add_flag("--timing", run.timing, "Record wall time per evaluation in the ms column");

  std::string plot_in, plot_figure, plot_out, plot_image;
  auto* plot_cmd = app.add_subcommand("plot", "Write a gnuplot script for a results CSV");
  plot_cmd->add_option("--in", plot_in, "Results CSV")->required();
  plot_cmd->add_option("--figure", plot_figure, "fig3, fig4, fig5, fig6 or fig7")->required();
  plot_cmd->add_option("--out", plot_out, "Script path")->required();
  plot_cmd->add_option("--image", plot_image, "Image the script renders (default: script name with .png)");

  secjam::acceptance::SuiteOptions verify;
  verify.workers = harness::default_workers();
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance criteria");
  verify_cmd->add_option("--trials", verify.trials, "Monte-Carlo trials per experiment")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--workers", verify.workers, "Worker threads")->check(CLI::Range(1, 1024));
  verify_cmd->add_option("--only", verify.only, "Criterion ids")->delimiter(',')->check(CLI::Range(1, 12));

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) return do_run(run);
  if (*plot_cmd) return do_plot(plot_in, plot_figure, plot_out, plot_image);
  const auto results = secjam::acceptance::run_suite(verify, std::cout);
  for (const auto& r : results)
    if (!r.pass) return kExitError;
  return kExitOk;
}
