#include <benchmark/benchmark.h>

#include <sstream>

#include "secjam/gsvd_relay.hpp"
#include "secjam/harness.hpp"
#include "secjam/numerics.hpp"
#include "secjam/scenario.hpp"
#include "secjam/single_stream.hpp"
#include "secjam/unknown_ecsi.hpp"

namespace {

using namespace secjam;

scenario::ChannelSet draw(int na, int nb, int nr, int ne, std::uint64_t seed = 1) {
  scenario::NetworkGeometry g;
  g.na = na;
  g.nb = nb;
  g.nr = nr;
  g.ne = ne;
  return scenario::draw_channels(g, seed);
}

constexpr double kNoise = 1e-6;

void BM_DrawChannels(benchmark::State& state) {
  scenario::NetworkGeometry g;
  g.na = g.nb = g.nr = g.ne = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(scenario::draw_channels(g, ++seed));
}
BENCHMARK(BM_DrawChannels)->Arg(1)->Arg(4)->Arg(8);

void BM_Gsvd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ch = draw(n, n, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(numerics::gsvd(ch.H_ar, ch.H_ae));
}
BENCHMARK(BM_Gsvd)->Arg(2)->Arg(4)->Arg(8);

void BM_WaterFill(benchmark::State& state) {
  std::vector<double> gains;
  for (int i = 0; i < state.range(0); ++i) gains.push_back(0.5 + i);
  for (auto _ : state) benchmark::DoNotOptimize(numerics::water_fill_min_power(gains, 3.0, kNoise));
}
BENCHMARK(BM_WaterFill)->Arg(2)->Arg(8);

void BM_SingleStreamMaximize(benchmark::State& state) {
  const auto ch = draw(4, 4, 1, static_cast<int>(state.range(0)));
  const auto budget = single::Budget::global(scenario::dbm_to_linear(10.0));
  for (auto _ : state) benchmark::DoNotOptimize(single::maximize_rate(ch, budget, kNoise));
}
BENCHMARK(BM_SingleStreamMaximize)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_GsvdOptimizeSimple(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto plan = gsvd_relay::build_plan(draw(n, n, n, n));
  const double p = scenario::dbm_to_linear(30.0);
  for (auto _ : state) benchmark::DoNotOptimize(gsvd_relay::optimize_simple(plan, p, kNoise));
}
BENCHMARK(BM_GsvdOptimizeSimple)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_GsvdPcjRefine(benchmark::State& state) {
  const auto ch = draw(4, 4, 4, 4);
  const auto plan = gsvd_relay::build_plan(ch);
  const double p = scenario::dbm_to_linear(30.0);
  const auto init = gsvd_relay::optimize_simple(plan, p, kNoise);
  const auto pcj = gsvd_relay::build_pcj(ch);
  for (auto _ : state) benchmark::DoNotOptimize(gsvd_relay::pcj_refine(ch, plan, pcj, p, kNoise, init));
}
BENCHMARK(BM_GsvdPcjRefine)->Unit(benchmark::kMillisecond);

void BM_UnknownEcsi(benchmark::State& state) {
  const auto ch = draw(4, 4, 4, static_cast<int>(state.range(0)));
  const double p = scenario::dbm_to_linear(15.0);
  const auto budget = unknown_ecsi::PowerBudget::global(p);
  for (auto _ : state) {
    const auto sel = unknown_ecsi::select_dimension(ch, 1.0, kNoise, p, unknown_ecsi::JamMode::Fcj);
    const auto alloc = unknown_ecsi::allocate(sel.plan, sel.need, budget, 1.0);
    benchmark::DoNotOptimize(unknown_ecsi::mi_difference(ch, sel.plan, alloc, kNoise));
  }
}
BENCHMARK(BM_UnknownEcsi)->Arg(1)->Arg(8);

void BM_HarnessRun(benchmark::State& state) {
  const auto cfg = harness::config_from(scenario::KeyValueConfig::parse_string(
      "schemes = pcj-single:global, nojam-single:global\nantennas = 4,4,1,1\npower_dbm = 0,30\ntrials = 20\n"));
  harness::RunOptions ro;
  ro.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    std::ostringstream os;
    benchmark::DoNotOptimize(harness::run(cfg, ro, os));
  }
}
BENCHMARK(BM_HarnessRun)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
