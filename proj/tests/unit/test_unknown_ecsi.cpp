#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "secjam/unknown_ecsi.hpp"
#include "support/instances.hpp"

using namespace secjam;
using namespace secjam::unknown_ecsi;
using scenario::ChannelSet;

namespace {

constexpr double kNoise = 1e-6;  // -60 dBm in mW
const double kBudget = scenario::dbm_to_linear(15.0);

double orthonormality_error(const CMat& m) {
  if (m.cols() == 0) return 0.0;
  return (m.adjoint() * m - CMat::Identity(m.cols(), m.cols())).norm();
}

// ½ Σ log₂(1 + g q / σ²).
double diag_rate(const RVec& gains, const RVec& q, double noise) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < gains.size(); ++i) r += 0.5 * std::log2(1.0 + gains(i) * q(i) / noise);
  return r;
}

// Smallest q1 + q2 over a 40-point grid on q1, with q2 solving the rate equation exactly.
double two_stream_grid(double g1, double g2, double rate, double noise) {
  const double q1_max = noise * (std::exp2(2.0 * rate) - 1.0) / g1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 40; ++i) {
    const double q1 = q1_max * i / 39.0;
    const double rest = std::exp2(2.0 * rate) / (1.0 + g1 * q1 / noise);
    const double q2 = std::max(0.0, noise * (rest - 1.0) / g2);
    best = std::min(best, q1 + q2);
  }
  return best;
}

}  // namespace

TEST_CASE("square full-rank plan at the top dimension leaves no transmitter jammers") {
  const auto ch = testsupport::channels(4, 4, 4, 4, 9100);
  const int s = stream_limit(ch);
  REQUIRE(s == 4);
  const auto plan = plan_for_dimension(ch, s, JamMode::Fcj);
  CHECK(plan.T_a_jam.cols() == 0);
  CHECK(plan.T_r_jam.cols() == 0);
  CHECK(plan.T_b_jam.cols() == 0);
  CHECK(plan.T_a2_jam.cols() == 0);
  CHECK_THROWS_AS(plan_for_dimension(ch, s + 1, JamMode::Fcj), ArgumentError);
  CHECK_THROWS_AS(plan_for_dimension(ch, 0, JamMode::Fcj), ArgumentError);
}

TEST_CASE("plan blocks are orthonormal and jamming is invisible to the legitimate receivers") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int nb = 2 + static_cast<int>(seed % 4);
    const auto ch = testsupport::channels(4, nb, 4, 3, 9200 + seed);
    for (int i = 1; i <= stream_limit(ch); ++i) {
      const auto plan = plan_for_dimension(ch, i, JamMode::Fcj);
      for (const CMat* m : {&plan.W_r, &plan.W_b, &plan.T_a, &plan.T_r, &plan.T_a_jam, &plan.T_r_jam,
                            &plan.T_b_jam, &plan.T_a2_jam}) {
        CHECK(orthonormality_error(*m) <= 1e-10);
      }
      CHECK(plan.T_a_jam.cols() == 4 - i);
      CHECK(plan.T_b_jam.cols() == std::max(0, nb - i));
      CHECK((plan.W_r.adjoint() * ch.H_br * plan.T_b_jam).norm() <= 1e-9 * ch.H_br.norm());
      CHECK((plan.W_r.adjoint() * ch.H_ar * plan.T_a_jam).norm() <= 1e-9 * ch.H_ar.norm());
      CHECK((plan.W_b.adjoint() * ch.H_ab * plan.T_a2_jam).norm() <= 1e-9 * ch.H_ab.norm());
      CHECK((plan.W_b.adjoint() * ch.H_rb * plan.T_r_jam).norm() <= 1e-9 * ch.H_rb.norm());
      CHECK(receiver_leakage(ch, plan) <= 1e-9);
    }
  }
}

TEST_CASE("diagonal channel selects the strongest coordinate axes") {
  ChannelSet ch = testsupport::channels(4, 4, 4, 2, 9300);
  RVec d(4);
  d << 1.0, 3.0, 0.5, 2.0;
  ch.H_ar = d.cast<cplx>().asDiagonal();
  for (int i = 1; i <= 3; ++i) {
    const auto plan = plan_for_dimension(ch, i, JamMode::Fcj);
    const int order[] = {1, 3, 0};
    for (int j = 0; j < i; ++j) {
      CHECK(std::abs(plan.W_r(order[j], j)) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(plan.T_a(order[j], j)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(plan.relay_gains(0) == doctest::Approx(9.0).epsilon(1e-12));
  }
}

TEST_CASE("single dimension needs the inverted capacity power") {
  const auto ch = testsupport::channels(1, 1, 1, 1, 9400);
  const auto plan = plan_for_dimension(ch, 1, JamMode::Fcj);
  const double rate = 1.3;
  const auto need = min_power_for_rate(plan, rate, kNoise, 1e9);
  const double g_ar = std::norm(ch.H_ar(0, 0));
  const double g_rb = std::norm(ch.H_rb(0, 0));
  CHECK(need.p_a == doctest::Approx(kNoise * (std::exp2(2.0 * rate) - 1.0) / g_ar).epsilon(1e-10));
  CHECK(need.p_r == doctest::Approx(kNoise * (std::exp2(2.0 * rate) - 1.0) / g_rb).epsilon(1e-10));
  CHECK(need.feasible);
}

TEST_CASE("zero target rate needs no power") {
  const auto ch = testsupport::channels(4, 4, 4, 4, 9500);
  const auto plan = plan_for_dimension(ch, 3, JamMode::Fcj);
  const auto need = min_power_for_rate(plan, 0.0, kNoise, kBudget);
  CHECK(need.p_a == 0.0);
  CHECK(need.p_r == 0.0);
  CHECK(need.feasible);
}

TEST_CASE("two-dimensional power need matches a grid over diagonal covariances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ch = testsupport::channels(4, 4, 4, 2, 9600 + seed);
    const auto plan = plan_for_dimension(ch, 2, JamMode::Fcj);
    const double rate = 0.5 + 0.25 * static_cast<double>(seed % 8);
    const auto need = min_power_for_rate(plan, rate, kNoise, kBudget);
    const double grid_a = two_stream_grid(plan.relay_gains(0), plan.relay_gains(1), rate, kNoise);
    const double grid_r = two_stream_grid(plan.bob_gains(0), plan.bob_gains(1), rate, kNoise);
    CHECK(need.p_a <= grid_a * (1.0 + 1e-9));
    CHECK(need.p_a >= grid_a * 0.99);
    CHECK(need.p_r <= grid_r * (1.0 + 1e-9));
    CHECK(need.p_r >= grid_r * 0.99);
    CHECK(diag_rate(plan.relay_gains, need.q_a, kNoise) == doctest::Approx(rate).epsilon(1e-9));
  }
}

TEST_CASE("a single usable dimension is always selected when feasible") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ch = testsupport::channels(4, 4, 1, 4, 9700 + seed);
    const auto sel = select_dimension(ch, 1.0, kNoise, kBudget, JamMode::Fcj);
    REQUIRE_FALSE(sel.outage);
    CHECK(sel.plan.k == 1);
  }
}

TEST_CASE("selection equals a brute-force scan and the naive criterion never picks fewer dimensions") {
  int naive_larger = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ch = testsupport::channels(4, 4, 4, 4, 9800 + seed);
    const double rate = 0.5 + static_cast<double>(seed % 6);
    const auto sel = select_dimension(ch, rate, kNoise, kBudget, JamMode::Fcj);
    const auto naive = select_dimension(ch, rate, kNoise, kBudget, JamMode::Fcj, Criterion::Naive);

    int brute_k = 0;
    double brute_cost = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 4; ++i) {
      const auto need = min_power_for_rate(plan_for_dimension(ch, i, JamMode::Fcj), rate, kNoise, kBudget);
      if (!need.feasible) continue;
      const double cost = (need.p_a + need.p_r) * i;
      if (cost < brute_cost) {
        brute_cost = cost;
        brute_k = i;
      }
    }
    CHECK(sel.outage == (brute_k == 0));
    CHECK(naive.outage == sel.outage);
    if (sel.outage) continue;
    CHECK(sel.plan.k == brute_k);
    CHECK(naive.plan.k >= sel.plan.k);
    if (naive.plan.k > sel.plan.k) ++naive_larger;
  }
  CHECK(naive_larger > 0);
}

TEST_CASE("outage is flagged exactly when every dimension exceeds the budget") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto ch = testsupport::channels(3, 3, 3, 2, 9900 + seed);
    const double rate = 4.0 + static_cast<double>(seed % 10);
    const double budget = scenario::dbm_to_linear(-10.0 + 2.0 * static_cast<double>(seed % 7));
    const auto sel = select_dimension(ch, rate, kNoise, budget, JamMode::Pcj);
    double min_needed = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= stream_limit(ch); ++i) {
      const auto need = min_power_for_rate(plan_for_dimension(ch, i, JamMode::Pcj), rate, kNoise, budget);
      min_needed = std::min(min_needed, std::max(need.p_a, need.p_r));
    }
    CHECK(sel.outage == (min_needed > budget));
  }
}

TEST_CASE("residual power is spread uniformly over the active jammers") {
  const auto ch = testsupport::channels(4, 4, 4, 4, 10000);
  const auto fcj = plan_for_dimension(ch, 2, JamMode::Fcj);
  auto pcj = plan_for_dimension(ch, 2, JamMode::Pcj);
  const auto need = min_power_for_rate(fcj, 1.0, kNoise, 1e9);
  const double budget = need.p_a + 4.0;
  PowerNeed balanced = need;
  balanced.p_r = need.p_a;
  balanced.q_r = need.q_a;
  balanced.feasible = true;

  const auto a = allocate(fcj, balanced, PowerBudget::global(budget), 1.0);
  REQUIRE(a.jam_a.size() == 2);
  REQUIRE(a.jam_b.size() == 2);
  for (double v : {a.jam_a(0), a.jam_a(1), a.jam_b(0), a.jam_b(1)}) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  const auto b = allocate(pcj, balanced, PowerBudget::global(budget), 1.0);
  CHECK(b.jam_a.isZero());
  CHECK(b.jam_r.isZero());
  for (double v : {b.jam_b(0), b.jam_b(1), b.jam_a2(0), b.jam_a2(1)}) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

  const auto none = allocate(fcj, balanced, PowerBudget::global(balanced.p_a), 1.0);
  CHECK(none.jam_a.isZero());
  CHECK(none.jam_b.isZero());
  CHECK(none.jam_r.isZero());
  CHECK(none.jam_a2.isZero());

  const auto off = allocate(fcj, balanced, PowerBudget::global(budget), 1.0, false);
  CHECK(off.jam_b.isZero());
  CHECK(off.unused_p1 == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("residual with no jamming dimension is reported unused") {
  const auto ch = testsupport::channels(4, 4, 4, 4, 10100);
  const auto plan = plan_for_dimension(ch, 4, JamMode::Fcj);
  const auto need = min_power_for_rate(plan, 1.0, kNoise, kBudget);
  REQUIRE(need.feasible);
  const auto a = allocate(plan, need, PowerBudget::global(kBudget), 1.0);
  CHECK(a.unused_p1 == doctest::Approx(kBudget - need.p_a).epsilon(1e-12));
  CHECK(a.unused_p2 == doctest::Approx(kBudget - need.p_r).epsilon(1e-12));
  CHECK(jam_fractions(a).phase1 == 0.0);
}

TEST_CASE("legitimate information equals the target rate") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto ch = testsupport::channels(4, 4, 4, 4, 10200 + seed);
    const double rate = 0.5 + 0.5 * static_cast<double>(seed % 5);
    for (auto mode : {JamMode::Fcj, JamMode::Pcj}) {
      const auto sel = select_dimension(ch, rate, kNoise, kBudget, mode);
      if (sel.outage) continue;
      const auto alloc = allocate(sel.plan, sel.need, PowerBudget::global(kBudget), rate);
      const auto gap = mi_difference(ch, sel.plan, alloc, kNoise);
      CHECK(gap.relay_info == doctest::Approx(rate).epsilon(1e-6));
      CHECK(gap.bob_info == doctest::Approx(rate).epsilon(1e-6));
      CHECK(std::abs(gap.i_d - rate) <= 1e-6);
      CHECK(gap.i_e <= gap.i_d + 1e-12);
      CHECK(gap.clamped >= 0.0);
      const auto f = jam_fractions(alloc);
      CHECK(f.phase1 >= 0.0);
      CHECK(f.phase1 <= 1.0);
    }
  }
}

TEST_CASE("eve mutual information matches a direct full-matrix evaluation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ch = testsupport::channels(4, 4, 4, 3, 10300 + seed);
    const auto sel = select_dimension(ch, 1.0, kNoise, kBudget, JamMode::Fcj);
    REQUIRE_FALSE(sel.outage);
    const auto alloc = allocate(sel.plan, sel.need, PowerBudget::global(kBudget), 1.0);
    const auto gap = mi_difference(ch, sel.plan, alloc, kNoise);

    const auto& p = sel.plan;
    auto cov = [](const CMat& t, const RVec& q) -> CMat {
      if (t.cols() == 0) return CMat::Zero(t.rows(), t.rows());
      return t * q.cast<cplx>().asDiagonal() * t.adjoint();
    };
    const Eigen::Index ne = ch.H_ae.rows();
    CMat k = kNoise * CMat::Identity(2 * ne, 2 * ne);
    k.topLeftCorner(ne, ne) += ch.H_ae * cov(p.T_a_jam, alloc.jam_a) * ch.H_ae.adjoint() +
                               ch.H_be * cov(p.T_b_jam, alloc.jam_b) * ch.H_be.adjoint();
    k.bottomRightCorner(ne, ne) += ch.H_re * cov(p.T_r_jam, alloc.jam_r) * ch.H_re.adjoint() +
                                   ch.H_ae * cov(p.T_a2_jam, alloc.jam_a2) * ch.H_ae.adjoint();
    CMat h(2 * ne, p.k);
    h << ch.H_ae * p.T_a * alloc.q_a.cwiseSqrt().cast<cplx>().asDiagonal(),
        ch.H_re * p.T_r * alloc.q_r.cwiseSqrt().cast<cplx>().asDiagonal();
    const CMat m = CMat::Identity(p.k, p.k) + h.adjoint() * k.inverse() * h;
    const Eigen::LLT<CMat> llt(0.5 * (m + m.adjoint()));
    double direct = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) direct += std::log2(std::real(llt.matrixLLT()(i, i)));
    CHECK(gap.eve_info == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("without jamming an eve holding copies of the legitimate channels learns as much as the receivers") {
  const auto geom = testsupport::geometry(4, 4, 4, 4);
  double sum = 0.0;
  int used = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    auto ch = scenario::draw_channels(geom, scenario::trial_seed(77, t));
    ch.H_ae = ch.H_ar;
    ch.H_re = ch.H_rb;
    const auto sel = select_dimension(ch, 1.0, kNoise, kBudget, JamMode::Fcj);
    if (sel.outage) continue;
    const auto alloc = allocate(sel.plan, sel.need, PowerBudget::global(kBudget), 1.0, false);
    sum += mi_difference(ch, sel.plan, alloc, kNoise).raw;
    ++used;
  }
  REQUIRE(used > 450);
  CHECK(std::abs(sum / used) < 0.1);
}

TEST_CASE("jamming never helps eve and usually hurts her") {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto ch = testsupport::channels(4, 4, 4, 4, 10400 + seed);
    const auto sel = select_dimension(ch, 1.0, kNoise, kBudget, JamMode::Fcj);
    REQUIRE_FALSE(sel.outage);
    const auto quiet = mi_difference(ch, sel.plan, allocate(sel.plan, sel.need, PowerBudget::global(kBudget), 1.0, false), kNoise);
    const auto loud = mi_difference(ch, sel.plan, allocate(sel.plan, sel.need, PowerBudget::global(1e6 * kBudget), 1.0), kNoise);
    CHECK(loud.eve_info <= quiet.eve_info + 1e-9);
    CHECK(loud.raw >= quiet.raw - 1e-9);
    if (loud.raw > quiet.raw + 1e-6) ++improved;
  }
  CHECK(improved > 25);
}

TEST_CASE("jamming dimension seen by eve respects its bounds") {
  SUBCASE("helper without spare antennas") {
    const auto ch = testsupport::channels(4, 2, 4, 3, 10500);
    const auto plan = plan_for_dimension(ch, 2, JamMode::Fcj);
    REQUIRE(plan.T_b_jam.cols() == 0);
    const auto r = jamming_dim_bound_check(ch, plan);
    CHECK(r.dimension == std::min(2, 3));
    CHECK(r.within);
  }
  SUBCASE("generic channels and a large array") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto ch = testsupport::channels(4, 4, 4, 8, 10600 + seed);
      for (int k = 1; k <= 3; ++k) {
        const auto r = jamming_dim_bound_check(ch, plan_for_dimension(ch, k, JamMode::Fcj));
        CHECK(r.dimension == 2 * (4 - k));
        CHECK(r.within);
      }
    }
  }
  SUBCASE("identical spans") {
    auto ch = testsupport::channels(4, 4, 4, 8, 10700);
    ch.H_be = ch.H_ae;
    auto plan = plan_for_dimension(ch, 1, JamMode::Fcj);
    plan.T_b_jam = plan.T_a_jam;
    const auto r = jamming_dim_bound_check(ch, plan);
    CHECK(r.dimension == 3);
    CHECK(r.within);
  }
}

TEST_CASE("full cooperation jams at least as well as partial on average") {
  const auto geom = testsupport::geometry(4, 4, 4, 4);
  double fcj = 0.0, pcj = 0.0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const auto ch = scenario::draw_channels(geom, scenario::trial_seed(91, t));
    for (auto mode : {JamMode::Fcj, JamMode::Pcj}) {
      const auto sel = select_dimension(ch, 1.0, kNoise, kBudget, mode);
      if (sel.outage) continue;
      const double d = mi_difference(ch, sel.plan, allocate(sel.plan, sel.need, PowerBudget::global(kBudget), 1.0), kNoise).clamped;
      (mode == JamMode::Fcj ? fcj : pcj) += d;
    }
  }
  CHECK(fcj >= pcj);
}

TEST_CASE("individual caps keep each node within half the phase budget") {
  const auto ch = testsupport::channels(4, 4, 4, 4, 10800);
  for (auto mode : {JamMode::Fcj, JamMode::Pcj}) {
    const auto budget = PowerBudget::split(kBudget);
    const auto sel = select_dimension(ch, 1.0, kNoise, budget.info_cap(), mode);
    REQUIRE_FALSE(sel.outage);
    const auto a = allocate(sel.plan, sel.need, budget, 1.0);
    const double half = 0.5 * kBudget;
    CHECK(a.jam_b.sum() == doctest::Approx(half).epsilon(1e-12));
    CHECK(a.jam_a2.sum() == doctest::Approx(half).epsilon(1e-12));
    if (mode == JamMode::Fcj) {
      CHECK(a.q_a.sum() + a.jam_a.sum() == doctest::Approx(half).epsilon(1e-12));
      CHECK(a.unused_p1 == 0.0);
    } else {
      CHECK(a.jam_a.isZero());
      CHECK(a.unused_p1 == doctest::Approx(half - a.q_a.sum()).epsilon(1e-12));
    }
  }
}
