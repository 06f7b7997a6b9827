#include "secjam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "secjam/gsvd_relay.hpp"
#include "secjam/single_stream.hpp"
#include "secjam/unknown_ecsi.hpp"

namespace secjam::harness {

using scenario::ConfigError;

namespace {

constexpr double kZeroForcingTol = 1e-10;

struct Named {
  Scheme scheme;
  const char* name;
};
constexpr Named kSchemes[] = {
    {Scheme::PcjSingle, "pcj-single"},       {Scheme::NoJamSingle, "nojam-single"},
    {Scheme::GsvdSimple, "gsvd-simple"},     {Scheme::GsvdPcj, "gsvd-pcj"},
    {Scheme::FcjUnknown, "fcj-unknown"},     {Scheme::PcjUnknown, "pcj-unknown"},
    {Scheme::NaivePcjUnknown, "naive-pcj-unknown"}, {Scheme::NoJamUnknown, "nojam-unknown"},
};

double half_log2(double x) { return 0.5 * std::log2(x); }

double fraction(double jam, double info) {
  const double total = jam + info;
  return total > 0.0 ? std::clamp(jam / total, 0.0, 1.0) : 0.0;
}

void record_zero_forcing(ZeroForcing* zf, double residual) {
  if (!zf) return;
  ++zf->checks;
  zf->max_residual = std::max(zf->max_residual, residual);
  if (!(residual <= kZeroForcingTol)) ++zf->violations;
}

Outcome single_stream(const SchemeSpec& spec, const TrialInput& in, ZeroForcing* zf) {
  const auto& ch = in.channels;
  single::Budget budget = spec.mode == Mode::Global       ? single::Budget::global(in.power_mw)
                          : spec.mode == Mode::Individual ? single::Budget::individual(in.power_mw)
                                                          : single::Budget::uniform(in.power_mw);
  single::Options opts;
  opts.allow_jamming = spec.scheme == Scheme::PcjSingle;
  const auto r = single::maximize_rate(ch, budget, in.noise_mw, opts);
  const auto& g = r.gammas;
  Outcome o;
  o.rs = r.secrecy.rate;
  o.id = half_log2(1.0 + std::min(g.ar, g.rb));
  o.ie = half_log2(1.0 + std::min(g.ar, g.ae + g.re));
  o.jam_frac_p1 = fraction(r.powers.p_b, r.powers.p_a);
  o.jam_frac_p2 = fraction(r.powers.p_a2, r.powers.p_r);
  if (r.bf.bob.t.size() > 0) {
    record_zero_forcing(zf, (ch.H_br * r.bf.bob.t).norm() / ch.H_br.norm());
  }
  if (r.bf.alice.t.size() > 0) {
    const CMat h = ch.H_rb.adjoint() * ch.H_ab;
    record_zero_forcing(zf, (h * r.bf.alice.t).norm() / (ch.H_rb.norm() * ch.H_ab.norm()));
  }
  return o;
}

Outcome gsvd(const SchemeSpec& spec, const TrialInput& in, TrialCache& cache) {
  if (!cache.plan) cache.plan = gsvd_relay::build_plan(in.channels);
  const auto& plan = *cache.plan;
  auto optimized = [&]() -> const gsvd_relay::SimpleAllocation& {
    if (!cache.optimized) cache.optimized = gsvd_relay::optimize_simple(plan, in.power_mw, in.noise_mw);
    return *cache.optimized;
  };
  Outcome o;
  if (spec.scheme == Scheme::GsvdSimple) {
    const auto a = spec.mode == Mode::Uniform ? gsvd_relay::uniform_allocation(plan, in.power_mw, in.noise_mw)
                                              : optimized();
    o.rs = a.rate.rate;
    o.id = std::min(a.rate.relay_info, a.rate.bob_info);
    o.ie = a.rate.eve_info;
    return o;
  }
  const auto pcj = gsvd_relay::build_pcj(in.channels);
  const auto ref = gsvd_relay::pcj_refine(in.channels, plan, pcj, in.power_mw, in.noise_mw, optimized());
  o.rs = ref.info.rate;
  o.id = ref.info.i_d;
  o.ie = ref.info.i_e;
  o.jam_frac_p1 = fraction(ref.cov.q_b.sum(), ref.cov.q_a.sum());
  o.jam_frac_p2 = fraction(ref.cov.q_a2.sum(), ref.cov.q_r.sum());
  return o;
}

Outcome unknown(const SchemeSpec& spec, const TrialInput& in) {
  using namespace unknown_ecsi;
  const auto mode = spec.scheme == Scheme::FcjUnknown || spec.scheme == Scheme::NoJamUnknown ? JamMode::Fcj
                                                                                             : JamMode::Pcj;
  const auto criterion = spec.scheme == Scheme::NaivePcjUnknown ? Criterion::Naive : Criterion::Product;
  const auto budget = spec.mode == Mode::Individual ? PowerBudget::split(in.power_mw)
                                                    : PowerBudget::global(in.power_mw);
  const auto sel = select_dimension(in.channels, in.rate_target, in.noise_mw, budget.info_cap(), mode, criterion);
  Outcome o;
  if (sel.outage) return o;
  const auto alloc = allocate(sel.plan, sel.need, budget, in.rate_target, spec.scheme != Scheme::NoJamUnknown);
  const auto gap = mi_difference(in.channels, sel.plan, alloc, in.noise_mw);
  const auto f = jam_fractions(alloc);
  o.rs = gap.clamped;
  o.id = gap.i_d;
  o.ie = gap.i_e;
  o.jam_frac_p1 = f.phase1;
  o.jam_frac_p2 = f.phase2;
  return o;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string to_string(Scheme s) {
  for (const auto& n : kSchemes)
    if (n.scheme == s) return n.name;
  return "unknown";
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Global: return "global";
    case Mode::Individual: return "individual";
    case Mode::Uniform: return "uniform";
  }
  return "unknown";
}

std::string to_string(SweepVar v) {
  switch (v) {
    case SweepVar::PowerDbm: return "power_dbm";
    case SweepVar::EveX: return "eve_x";
    case SweepVar::Ne: return "ne";
    case SweepVar::RateTarget: return "rate_target";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& s) {
  for (const auto& n : kSchemes)
    if (s == n.name) return n.scheme;
  throw ConfigError("config: unknown scheme '" + s + "'");
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::Global, Mode::Individual, Mode::Uniform})
    if (s == to_string(m)) return m;
  throw ConfigError("config: unknown constraint mode '" + s + "'");
}

SweepVar parse_sweep_var(const std::string& s) {
  for (SweepVar v : {SweepVar::PowerDbm, SweepVar::EveX, SweepVar::Ne, SweepVar::RateTarget})
    if (s == to_string(v)) return v;
  throw ConfigError("config: unknown sweep variable '" + s + "'");
}

bool mode_supported(Scheme s, Mode m) {
  switch (s) {
    case Scheme::PcjSingle: return true;
    case Scheme::NoJamSingle: return m != Mode::Uniform;
    case Scheme::GsvdSimple: return m != Mode::Individual;
    case Scheme::GsvdPcj: return m == Mode::Global;
    case Scheme::FcjUnknown:
    case Scheme::PcjUnknown:
    case Scheme::NaivePcjUnknown: return m != Mode::Uniform;
    case Scheme::NoJamUnknown: return m == Mode::Global;
  }
  return false;
}

void ExperimentConfig::validate() const {
  if (schemes.empty()) throw ConfigError("config: no schemes");
  if (grid.empty()) throw ConfigError("config: sweep grid is empty");
  if (trials < 1) throw ConfigError("config: 'trials' must be >= 1");
  for (const auto& s : schemes) {
    if (!mode_supported(s.scheme, s.mode)) {
      throw ConfigError("config: scheme '" + to_string(s.scheme) + "' does not support mode '" +
                        to_string(s.mode) + "'");
    }
  }
  for (double v : grid) {
    if (!std::isfinite(v)) throw ConfigError("config: non-finite grid value");
    if (sweep == SweepVar::Ne && (v < 1.0 || v != std::floor(v))) {
      throw ConfigError("config: 'ne' grid values must be positive integers");
    }
    if (sweep == SweepVar::RateTarget && v < 0.0) throw ConfigError("config: negative rate target");
    const auto g = geometry_at(v);
    try {
      g.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& s : schemes) {
      if ((s.scheme == Scheme::PcjSingle || s.scheme == Scheme::NoJamSingle) && g.nr != 1) {
        throw ConfigError("config: scheme '" + to_string(s.scheme) + "' needs a single-antenna relay (nr = 1)");
      }
    }
  }
  if (!(rate_target >= 0.0)) throw ConfigError("config: negative rate target");
}

scenario::NetworkGeometry ExperimentConfig::geometry_at(double value) const {
  auto g = geometry;
  if (sweep == SweepVar::EveX) g.eve.x = value;
  if (sweep == SweepVar::Ne) g.ne = static_cast<int>(value);
  return g;
}

double ExperimentConfig::power_mw_at(double value) const {
  return scenario::dbm_to_linear(sweep == SweepVar::PowerDbm ? value : power_dbm);
}

double ExperimentConfig::rate_target_at(double value) const {
  return sweep == SweepVar::RateTarget ? value : rate_target;
}

ExperimentConfig config_from(const scenario::KeyValueConfig& kv) {
  const auto sc = scenario::scenario_from(kv);
  ExperimentConfig cfg;
  cfg.geometry = sc.geometry;
  cfg.trials = sc.trials;
  cfg.seed_base = sc.seed_base;
  if (!kv.has("schemes")) throw ConfigError("config: missing 'schemes'");
  for (const auto& item : kv.get_list("schemes")) {
    const auto colon = item.find(':');
    SchemeSpec spec;
    spec.scheme = parse_scheme(item.substr(0, colon));
    spec.mode = colon == std::string::npos ? Mode::Global : parse_mode(item.substr(colon + 1));
    cfg.schemes.push_back(spec);
  }
  cfg.sweep = parse_sweep_var(kv.get_or("sweep", "power_dbm"));
  if (kv.has("grid")) {
    cfg.grid = kv.get_doubles("grid");
  } else if (cfg.sweep == SweepVar::PowerDbm) {
    cfg.grid = sc.power_dbm;
  } else {
    throw ConfigError("config: missing 'grid' for sweep '" + to_string(cfg.sweep) + "'");
  }
  if (cfg.sweep != SweepVar::PowerDbm && sc.power_dbm.size() != 1) {
    throw ConfigError("config: 'power_dbm' must be a single value unless power is swept");
  }
  cfg.power_dbm = sc.power_dbm.front();
  cfg.rate_target = kv.get_double("rate_target", cfg.rate_target);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from(scenario::KeyValueConfig::load(path));
}

void ZeroForcing::merge(const ZeroForcing& o) {
  checks += o.checks;
  violations += o.violations;
  max_residual = std::max(max_residual, o.max_residual);
}

Outcome evaluate(const SchemeSpec& spec, const TrialInput& in, ZeroForcing* zf, TrialCache* cache) {
  if (!mode_supported(spec.scheme, spec.mode)) throw ArgumentError("evaluate: unsupported scheme/mode pair");
  switch (spec.scheme) {
    case Scheme::PcjSingle:
    case Scheme::NoJamSingle: return single_stream(spec, in, zf);
    case Scheme::GsvdSimple:
    case Scheme::GsvdPcj: {
      TrialCache local;
      return gsvd(spec, in, cache ? *cache : local);
    }
    default: return unknown(spec, in);
  }
}

std::string format_row(const ResultRow& r) {
  std::string s;
  s += r.scheme + ',' + r.mode + ',' + r.sweep_var + ',' + format_double(r.sweep_value) + ',';
  s += std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',';
  const auto& o = r.outcome;
  for (double v : {o.rs, o.id, o.ie, o.jam_frac_p1, o.jam_frac_p2}) s += format_double(v) + ',';
  s += format_double(o.ms);
  return s;
}

int default_workers() {
  if (const char* env = std::getenv("SECJAM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

RunSummary run(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& csv) {
  cfg.validate();
  const long long tasks = static_cast<long long>(cfg.grid.size()) * cfg.trials;
  const double noise = scenario::dbm_to_linear(cfg.geometry.noise_dbm);

  struct TaskResult {
    std::vector<std::string> lines;
    std::vector<std::string> errors;
    long long failures = 0;
    ZeroForcing zf;
  };
  std::vector<std::optional<TaskResult>> done(static_cast<std::size_t>(tasks));
  std::mutex mu;
  long long next_flush = 0;
  RunSummary summary;
  summary.attempts = tasks * static_cast<long long>(cfg.schemes.size());

  csv << kCsvHeader << '\n';
  csv.flush();

  // Emits the completed prefix in task order; caller holds `mu`.
  auto flush = [&] {
    while (next_flush < tasks && done[static_cast<std::size_t>(next_flush)]) {
      auto& r = *done[static_cast<std::size_t>(next_flush)];
      for (const auto& line : r.lines) csv << line << '\n';
      if (opts.log)
        for (const auto& e : r.errors) *opts.log << e << '\n';
      summary.rows += static_cast<long long>(r.lines.size());
      summary.failures += r.failures;
      summary.zero_forcing.merge(r.zf);
      r = TaskResult{};
      ++next_flush;
    }
    csv.flush();
  };

  std::atomic<long long> cursor{0};
  auto worker = [&] {
    for (;;) {
      const long long task = cursor.fetch_add(1);
      if (task >= tasks) return;
      const auto vi = static_cast<std::size_t>(task / cfg.trials);
      const long long trial = task % cfg.trials;
      const double value = cfg.grid[vi];
      TaskResult res;
      const std::uint64_t seed = scenario::trial_seed(cfg.seed_base, static_cast<std::uint64_t>(trial));
      TrialInput in;
      in.power_mw = cfg.power_mw_at(value);
      in.rate_target = cfg.rate_target_at(value);
      in.noise_mw = noise;
      in.channels = scenario::draw_channels(cfg.geometry_at(value), seed);
      TrialCache cache;
      for (const auto& spec : cfg.schemes) {
        ResultRow row;
        row.scheme = to_string(spec.scheme);
        row.mode = to_string(spec.mode);
        row.sweep_var = to_string(cfg.sweep);
        row.sweep_value = value;
        row.trial = trial;
        row.seed = seed;
        try {
          const auto t0 = std::chrono::steady_clock::now();
          row.outcome = evaluate(spec, in, &res.zf, &cache);
          if (opts.timing) {
            row.outcome.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
          }
          res.lines.push_back(format_row(row));
        } catch (const std::exception& e) {
          ++res.failures;
          res.errors.push_back("trial " + std::to_string(trial) + " " + to_string(cfg.sweep) + "=" +
                               format_double(value) + " " + row.scheme + ":" + row.mode + ": " + e.what());
        }
      }
      std::lock_guard<std::mutex> lock(mu);
      done[static_cast<std::size_t>(task)] = std::move(res);
      flush();
    }
  };

  const int n = std::max(1, opts.workers);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  summary.failure_rate_exceeded =
      summary.attempts > 0 &&
      static_cast<double>(summary.failures) > opts.max_failure_rate * static_cast<double>(summary.attempts);
  return summary;
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("results: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw SchemaError("results: unexpected header '" + line + "'");
  std::vector<ResultRow> rows;
  long long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 12) throw SchemaError("results: line " + std::to_string(lineno) + " has " +
                                          std::to_string(f.size()) + " fields, expected 12");
    try {
      ResultRow r;
      r.scheme = f[0];
      r.mode = f[1];
      r.sweep_var = f[2];
      r.sweep_value = std::stod(f[3]);
      r.trial = std::stoll(f[4]);
      r.seed = std::stoull(f[5]);
      r.outcome.rs = std::stod(f[6]);
      r.outcome.id = std::stod(f[7]);
      r.outcome.ie = std::stod(f[8]);
      r.outcome.jam_frac_p1 = std::stod(f[9]);
      r.outcome.jam_frac_p2 = std::stod(f[10]);
      r.outcome.ms = std::stod(f[11]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw SchemaError("results: line " + std::to_string(lineno) + " has a non-numeric field");
    }
  }
  if (rows.empty()) throw SchemaError("results: no data rows");
  return rows;
}

std::vector<SeriesPoint> summarize(const std::vector<ResultRow>& rows, Metric metric) {
  struct Acc {
    double sum = 0.0, sum2 = 0.0;
    long long n = 0;
  };
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::map<double, Acc>> acc;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.scheme, r.mode);
    if (!acc.count(key)) order.push_back(key);
    const double v = metric == Metric::Rs ? r.outcome.rs : 0.5 * (r.outcome.jam_frac_p1 + r.outcome.jam_frac_p2);
    auto& a = acc[key][r.sweep_value];
    a.sum += v;
    a.sum2 += v * v;
    ++a.n;
  }
  std::vector<SeriesPoint> out;
  for (const auto& key : order) {
    for (const auto& [x, a] : acc[key]) {
      SeriesPoint p;
      p.scheme = key.first;
      p.mode = key.second;
      p.x = x;
      p.n = a.n;
      p.mean = a.sum / static_cast<double>(a.n);
      if (a.n > 1) {
        const double var = std::max(0.0, (a.sum2 - a.sum * p.mean) / static_cast<double>(a.n - 1));
        p.std_error = std::sqrt(var / static_cast<double>(a.n));
      }
      out.push_back(p);
    }
  }
  return out;
}

void emit_plot_script(const std::vector<ResultRow>& rows, const std::string& figure,
                      const std::string& image_path, std::ostream& out) {
  struct Labels {
    const char* id;
    const char* x;
    const char* y;
    bool integer_x;
  };
  static constexpr Labels kFigures[] = {
      {"fig3", "Transmit power P (dBm)", "Secrecy rate (bits/channel use)", false},
      {"fig4", "Eve x position (km)", "Secrecy rate (bits/channel use)", false},
      {"fig5", "Transmit power P (dBm)", "Secrecy rate (bits/channel use)", false},
      {"fig6", "Target rate R_t (bits/channel use)", "I_d - I_e (bits/channel use)", false},
      {"fig7", "Eve antennas N_e", "I_d - I_e (bits/channel use)", true},
  };
  const Labels* lab = nullptr;
  for (const auto& f : kFigures)
    if (figure == f.id) lab = &f;
  if (!lab) throw ArgumentError("plot: unknown figure '" + figure + "' (expected fig3..fig7)");
  if (rows.empty()) throw SchemaError("plot: no data rows");

  const auto points = summarize(rows);
  out << "# Mean with standard-error bars per scheme and constraint mode.\n";
  out << "set terminal pngcairo size 900,600\n";
  out << "set output '" << image_path << "'\n";
  out << "set xlabel '" << lab->x << "'\n";
  out << "set ylabel '" << lab->y << "'\n";
  out << "set key outside right\n";
  out << "set grid\n";
  if (lab->integer_x) out << "set xtics 1,1,8\nset xrange [0.5:8.5]\n";

  std::vector<std::string> names, titles;
  std::string current;
  for (const auto& p : points) {
    const std::string key = p.scheme + ":" + p.mode;
    if (key != current) {
      if (!current.empty()) out << "EOD\n";
      current = key;
      std::string name = "$" + p.scheme + "_" + p.mode;
      std::replace(name.begin(), name.end(), '-', '_');
      names.push_back(name);
      titles.push_back(p.scheme + " (" + p.mode + ")");
      out << name << " << EOD\n";
    }
    out << format_double(p.x) << ' ' << format_double(p.mean) << ' ' << format_double(p.std_error) << '\n';
  }
  out << "EOD\n";
  out << "plot ";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out << ", \\\n     ";
    out << names[i] << " using 1:2:3 with yerrorlines title '" << titles[i] << "'";
  }
  out << '\n';
}

}  // namespace secjam::harness
