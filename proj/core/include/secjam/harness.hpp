#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "secjam/gsvd_relay.hpp"
#include "secjam/scenario.hpp"
#include "secjam/types.hpp"

namespace secjam::harness {

enum class Scheme {
  PcjSingle,        // single-antenna relay, GP power control with helper jamming
  NoJamSingle,      // same GP with jamming disabled
  GsvdSimple,       // GSVD beamforming, optimized (global) or uniform power
  GsvdPcj,          // GSVD beamforming plus refined helper jamming
  FcjUnknown,       // unknown Eve CSI, transmitter and helper jam
  PcjUnknown,       // unknown Eve CSI, helper jams
  NaivePcjUnknown,  // PCJ with the power-only dimension criterion
  NoJamUnknown,     // unknown Eve CSI, information only
};

enum class Mode { Global, Individual, Uniform };
enum class SweepVar { PowerDbm, EveX, Ne, RateTarget };

std::string to_string(Scheme s);
std::string to_string(Mode m);
std::string to_string(SweepVar v);
/// Parsers throw scenario::ConfigError on unknown names.
Scheme parse_scheme(const std::string& s);
Mode parse_mode(const std::string& s);
SweepVar parse_sweep_var(const std::string& s);

struct SchemeSpec {
  Scheme scheme = Scheme::PcjSingle;
  Mode mode = Mode::Global;
  bool operator==(const SchemeSpec&) const = default;
};

/// Whether the scheme supports the constraint mode.
bool mode_supported(Scheme s, Mode m);

struct ExperimentConfig {
  scenario::NetworkGeometry geometry;
  std::vector<SchemeSpec> schemes;
  SweepVar sweep = SweepVar::PowerDbm;
  std::vector<double> grid{10.0};
  double power_dbm = 10.0;    // used unless power is swept
  double rate_target = 1.0;   // bits/channel use, unknown-CSI schemes
  long long trials = 500;
  std::uint64_t seed_base = 1;

  /// Throws scenario::ConfigError.
  void validate() const;
  /// Geometry with the sweep value applied.
  scenario::NetworkGeometry geometry_at(double value) const;
  double power_mw_at(double value) const;
  double rate_target_at(double value) const;
};

/// Keys: schemes = name:mode, ... ; sweep; grid; power_dbm; rate_target; trials; seed_base;
/// plus the geometry keys (alice, bob, relay, eve, na, nb, nr, ne, antennas,
/// path_loss_exponent, noise_dbm).
ExperimentConfig config_from(const scenario::KeyValueConfig& kv);
ExperimentConfig load_config(const std::string& path);

inline constexpr const char* kCsvHeader =
    "scheme,mode,sweep_var,sweep_value,trial,seed,Rs,Id,Ie,jam_frac_p1,jam_frac_p2,ms";

struct Outcome {
  double rs = 0.0;  // secrecy rate, or the clamped information gap for unknown-CSI schemes
  double id = 0.0;
  double ie = 0.0;
  double jam_frac_p1 = 0.0;
  double jam_frac_p2 = 0.0;
  double ms = 0.0;
};

/// Zero-forcing residuals of the single-stream jammers, relative to the link norms.
struct ZeroForcing {
  long long checks = 0;
  long long violations = 0;  // residual above 1e-10
  double max_residual = 0.0;
  void merge(const ZeroForcing& o);
};

struct TrialInput {
  scenario::ChannelSet channels;
  double power_mw = 1.0;
  double rate_target = 1.0;
  double noise_mw = 1e-9;
};

/// Work shared by schemes evaluated on the same TrialInput.
struct TrialCache {
  std::optional<gsvd_relay::GsvdRelayPlan> plan;
  std::optional<gsvd_relay::SimpleAllocation> optimized;
};

/// Evaluates one scheme; solver failures propagate as exceptions.
Outcome evaluate(const SchemeSpec& spec, const TrialInput& in, ZeroForcing* zf = nullptr,
                 TrialCache* cache = nullptr);

struct RunOptions {
  int workers = 1;
  bool timing = false;             // otherwise the ms column is 0 so reruns are byte-identical
  double max_failure_rate = 0.05;
  std::ostream* log = nullptr;     // per-trial failures
};

struct RunSummary {
  long long attempts = 0;
  long long rows = 0;
  long long failures = 0;
  ZeroForcing zero_forcing;
  bool failure_rate_exceeded = false;
};

/// Writes the header and one row per successful (value, trial, scheme), ordered by
/// (value, trial, scheme) and flushed as soon as a prefix is complete.
RunSummary run(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& csv);

/// Worker count from SECJAM_WORKERS, else 1.
int default_workers();

struct ResultRow {
  std::string scheme;
  std::string mode;
  std::string sweep_var;
  double sweep_value = 0.0;
  long long trial = 0;
  std::uint64_t seed = 0;
  Outcome outcome;
};

std::string format_row(const ResultRow& r);

/// Malformed or empty results file.
class SchemaError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

std::vector<ResultRow> read_csv(std::istream& in);

struct SeriesPoint {
  std::string scheme;
  std::string mode;
  double x = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  long long n = 0;
};

enum class Metric { Rs, JamFraction };

/// Mean and standard error per (scheme, mode, sweep value), in first-appearance order of the
/// series and increasing x.
std::vector<SeriesPoint> summarize(const std::vector<ResultRow>& rows, Metric metric = Metric::Rs);

/// Figure ids: fig3, fig4, fig5, fig6, fig7. Throws ArgumentError on others.
void emit_plot_script(const std::vector<ResultRow>& rows, const std::string& figure,
                      const std::string& image_path, std::ostream& out);

}  // namespace secjam::harness
