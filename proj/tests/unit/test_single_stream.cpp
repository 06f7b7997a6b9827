#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "secjam/numerics.hpp"
#include "secjam/single_stream.hpp"
#include "support/instances.hpp"
#include "support/random_matrices.hpp"

using namespace secjam;
using namespace secjam::single;
using scenario::ChannelSet;

namespace {

constexpr double kNoise = 1e-6;

double quotient(const ChannelSet& ch, const CVec& t, double p_a) {
  const double snr = p_a / kNoise;
  const double num = 1.0 + snr * (ch.H_ar * t).squaredNorm();
  const double den = 1.0 + snr * (ch.H_ae * t).squaredNorm();
  return num / den;
}

// Balanced lower bound using the weaker hop.
double balanced_bound(const Sinrs& g) {
  return 0.5 * std::log2(std::min(g.ar, g.rb) / (1.0 + g.ae + g.re));
}

double grid_best_bound(const ChannelSet& ch, double p_total, int n) {
  double best = -1e300;
  for (int i = 1; i <= n; ++i) {
    const double p_a = p_total * i / n;
    const CVec t_a = info_beamformer(ch, p_a, kNoise);
    for (int j = 1; j <= n; ++j) {
      const double p_r = p_total * j / n;
      const Powers p{p_a, p_total - p_a, p_r, p_total - p_r};
      best = std::max(best, balanced_bound(evaluate(ch, t_a, p, kNoise).gammas));
    }
  }
  return best;
}

void check_zero_forcing(const ChannelSet& ch, const Beamformers& bf) {
  if (bf.bob.t.size() > 0) {
    CHECK(std::abs((ch.H_br * bf.bob.t)(0)) <= 1e-10 * ch.H_br.norm());
    CHECK(bf.bob.t.norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
  if (bf.alice.t.size() > 0) {
    const CMat protect = ch.H_rb.adjoint() * ch.H_ab;
    CHECK(std::abs((protect * bf.alice.t)(0)) <= 1e-10 * protect.norm());
    CHECK(bf.alice.t.norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(bf.t_a.norm() == doctest::Approx(1.0).epsilon(1e-10));
}

}  // namespace

TEST_CASE("info beamformer is the matched filter without an eavesdropper link") {
  auto ch = testsupport::channels(3, 2, 1, 2, 11);
  ch.H_ae.setZero();
  const CVec t = info_beamformer(ch, 1.0, kNoise);
  const CVec mf = ch.H_ar.row(0).adjoint() / ch.H_ar.norm();
  CHECK(std::abs(std::abs(mf.dot(t)) - 1.0) < 1e-10);
}

TEST_CASE("info beamformer aligns with the relay when eve sees an orthogonal subspace") {
  auto ch = testsupport::channels(3, 2, 1, 2, 12);
  const CMat g = numerics::null_basis(ch.H_ar);
  ch.H_ae = CMat::Random(2, 2) * g.adjoint();
  for (double p : {1e-3, 1.0, 100.0}) {
    const CVec t = info_beamformer(ch, p, kNoise);
    const CVec mf = ch.H_ar.row(0).adjoint() / ch.H_ar.norm();
    CHECK(std::abs(std::abs(mf.dot(t)) - 1.0) < 1e-8);
  }
}

TEST_CASE("info beamformer beats random unit vectors") {
  std::mt19937_64 rng(5);
  for (int inst = 0; inst < 10; ++inst) {
    const auto ch = testsupport::channels(4, 2, 1, 2, 100 + inst);
    const CVec t = info_beamformer(ch, 1.0, kNoise);
    const double best = quotient(ch, t, 1.0);
    for (int s = 0; s < 1000; ++s) {
      CHECK(quotient(ch, testsupport::random_unit(rng, 4), 1.0) <= best * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("jammers zero-force the legitimate receivers") {
  for (int inst = 0; inst < 50; ++inst) {
    const auto ch = testsupport::channels(3, 3, 1, 2, 200 + inst);
    const CVec t_a = info_beamformer(ch, 1.0, kNoise);
    const auto bf = build_beamformers(ch, t_a, Powers{1.0, 1.0, 1.0, 1.0}, kNoise);
    check_zero_forcing(ch, bf);
  }
}

TEST_CASE("bob jammer approaches the projected eve direction at vanishing power") {
  const auto ch = testsupport::channels(2, 2, 1, 1, 31);
  const CVec t_a = info_beamformer(ch, 1.0, kNoise);
  const CMat g = numerics::null_basis(ch.H_br);
  CVec target = g * (g.adjoint() * (ch.H_be.adjoint() * ch.H_ae * t_a));
  target /= target.norm();
  const Jammer j = bob_jammer(ch, t_a, 1e-9, kNoise);
  CHECK(std::abs(std::abs(target.dot(j.t)) - 1.0) < 1e-6);
}

TEST_CASE("bob jammer beats random rank-one jammers in the null space") {
  std::mt19937_64 rng(7);
  for (int inst = 0; inst < 10; ++inst) {
    const auto ch = testsupport::channels(3, 4, 1, 2, 300 + inst);
    const CVec t_a = info_beamformer(ch, 1.0, kNoise);
    const double p_b = 0.3;
    const Jammer j = bob_jammer(ch, t_a, p_b, kNoise);
    const double best = gamma_ae_with_covariance(ch, t_a, 1.0, p_b * j.t * j.t.adjoint(), kNoise);
    const CMat g = numerics::null_basis(ch.H_br);
    for (int s = 0; s < 200; ++s) {
      CVec c = testsupport::random_unit(rng, static_cast<int>(g.cols()));
      const CVec t = g * c;
      CHECK(best <= gamma_ae_with_covariance(ch, t_a, 1.0, p_b * t * t.adjoint(), kNoise) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("alice jammer beats random feasible jammers") {
  std::mt19937_64 rng(8);
  for (int inst = 0; inst < 10; ++inst) {
    const auto ch = testsupport::channels(4, 2, 1, 2, 400 + inst);
    const double p_a2 = 0.2;
    const Powers p{1.0, 0.0, 1.0, p_a2};
    const CVec t_a = info_beamformer(ch, 1.0, kNoise);
    const double best = sinrs(ch, build_beamformers(ch, t_a, p, kNoise), p, kNoise).re;
    const CMat g = numerics::null_basis(ch.H_rb.adjoint() * ch.H_ab);
    for (int s = 0; s < 200; ++s) {
      const CVec t = g * testsupport::random_unit(rng, static_cast<int>(g.cols()));
      CMat k = kNoise * CMat::Identity(2, 2);
      const CVec u = ch.H_ae * t;
      k += p_a2 * u * u.adjoint();
      const CVec v = ch.H_re.col(0);
      const double other = std::real(v.dot(k.llt().solve(v)));
      CHECK(best <= other * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("relay leakage ignores alice jamming when eve cannot hear alice") {
  auto ch = testsupport::channels(3, 2, 1, 2, 41);
  ch.H_ae.setZero();
  const Powers p{1.0, 0.0, 0.5, 0.5};
  const CVec t_a = ch.H_ar.row(0).adjoint() / ch.H_ar.norm();
  const auto g = sinrs(ch, build_beamformers(ch, t_a, p, kNoise), p, kNoise);
  CHECK(g.re == doctest::Approx(0.5 / kNoise * ch.H_re.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("sinr limits and identities") {
  const auto ch = testsupport::channels(3, 3, 1, 2, 51);
  const CVec t_a = info_beamformer(ch, 1.0, kNoise);
  SUBCASE("no jamming") {
    const Powers p{1.0, 0.0, 1.0, 0.0};
    const auto g = sinrs(ch, build_beamformers(ch, t_a, p, kNoise), p, kNoise);
    CHECK(g.ae == doctest::Approx(1.0 / kNoise * (ch.H_ae * t_a).squaredNorm()).epsilon(1e-12));
  }
  SUBCASE("direct and expanded forms agree") {
    for (double p_b : {1e-6, 1e-4, 1e-2}) {
      const Powers p{1.0, p_b, 1.0, 0.0};
      const auto g = sinrs(ch, build_beamformers(ch, t_a, p, kNoise), p, kNoise);
      const double expanded = gamma_ae_expanded(ch, t_a, 1.0, p_b, kNoise);
      CHECK(std::abs(g.ae - expanded) <= 1e-10 * expanded);
    }
  }
  SUBCASE("silent eve") {
    auto quiet = ch;
    quiet.H_ae.setZero();
    quiet.H_re.setZero();
    quiet.H_be.setZero();
    const Powers p{1.0, 0.5, 1.0, 0.5};
    const auto g = sinrs(quiet, build_beamformers(quiet, t_a, p, kNoise), p, kNoise);
    CHECK(g.ae == 0.0);
    CHECK(g.re == 0.0);
  }
}

TEST_CASE("secrecy rate case expression") {
  CHECK(secrecy_rate_single(3, 3, 0.5, 0.5).rate == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(secrecy_rate_single(3, 3, 0.5, 0.5).power_adjusted);
  CHECK(secrecy_rate_single(1, 2, 1, 1).rate == 0.0);
  CHECK_FALSE(secrecy_rate_single(1, 2, 1, 1).secure_case);
  CHECK(secrecy_rate_single(2, 2, 1, 1).rate == 0.0);
  CHECK(secrecy_rate_single(7, 3, 0.0, 1.0).rate == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("linear effective-power fit stays within five percent") {
  for (int inst = 0; inst < 20; ++inst) {
    const auto ch = testsupport::channels(4, 4, 1, 1, 500 + inst);
    const double budget = 10.0;
    const CVec t_a = info_beamformer(ch, budget, kNoise);
    const auto fb = fit_effective_power([&](double p) { return bob_residual_gain(ch, t_a, p, kNoise); }, budget);
    const auto fa = fit_effective_power([&](double p) { return alice_residual_gain(ch, p, kNoise); }, budget);
    CHECK(fb.slope > 0.0);
    CHECK(fb.intercept > 0.0);
    CHECK(fa.slope > 0.0);
    CHECK(fa.intercept > 0.0);
    CHECK(fb.max_rel_error <= 0.05);
    CHECK(fa.max_rel_error <= 0.05);
    // Independent dense check over the fit range.
    for (int i = 0; i <= 64; ++i) {
      const double p = fb.lo * std::pow(fb.hi / fb.lo, i / 64.0);
      const double exact = 1.0 / bob_residual_gain(ch, t_a, p, kNoise);
      CHECK(std::abs(fb.slope * p + fb.intercept - exact) <= 0.05 * exact);
    }
  }
}

TEST_CASE("residual gain matches the expanded quadratic form") {
  const auto ch = testsupport::channels(3, 3, 1, 2, 61);
  const CVec t_a = info_beamformer(ch, 1.0, kNoise);
  for (double p_b : {1e-5, 1e-3}) {
    const double q = bob_residual_gain(ch, t_a, p_b, kNoise);
    const double expanded = gamma_ae_expanded(ch, t_a, 1.0, p_b, kNoise) * kNoise;
    CHECK(std::abs(q - expanded) <= 1e-9 * expanded);
  }
}

TEST_CASE("exact rate dominates the lower bound") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 50; ++inst) {
    const auto ch = testsupport::channels(4, 4, 1, 1, 600 + inst);
    const Powers p{u(rng), u(rng), u(rng), u(rng)};
    const auto r = evaluate(ch, info_beamformer(ch, p.p_a, kNoise), p, kNoise);
    check_zero_forcing(ch, r.bf);
    CHECK(r.secrecy.rate >= r.lower_bound - 1e-12);
  }
}

TEST_CASE("without eve links all power goes to data") {
  auto ch = testsupport::channels(2, 2, 1, 1, 71);
  ch.H_ae.setZero();
  ch.H_re.setZero();
  ch.H_be.setZero();
  const auto r = maximize_rate(ch, Budget::global(1.0), kNoise);
  CHECK(r.powers.p_b == 0.0);
  CHECK(r.powers.p_a2 == 0.0);
  CHECK(r.gammas.ar == doctest::Approx(r.gammas.rb).epsilon(1e-6));
  CHECK(r.secrecy.rate == doctest::Approx(0.5 * std::log2(1.0 + r.gammas.ar)).epsilon(1e-12));
  CHECK(std::max(r.powers.p_a, r.powers.p_r) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("symmetric hops get equal powers") {
  auto ch = testsupport::channels(2, 2, 1, 1, 72);
  ch.H_ae.setZero();
  ch.H_be.setZero();
  ch.H_re.setZero();
  // Single antenna at the information side: |h_ar t_a|² = ‖h_ar‖².
  ch.H_rb.col(0) = ch.H_rb.col(0) * (ch.H_ar.norm() / ch.H_rb.norm());
  const auto r = maximize_rate(ch, Budget::global(1.0), kNoise);
  CHECK(r.powers.p_a == doctest::Approx(r.powers.p_r).epsilon(1e-6));
}

TEST_CASE("maximize_rate matches a grid search over the data powers") {
  for (int inst = 0; inst < 20; ++inst) {
    const auto ch = testsupport::channels(2, 2, 1, 1, 700 + inst);
    const double p_total = 1.0;
    const auto r = maximize_rate(ch, Budget::global(p_total), kNoise);
    const double grid = grid_best_bound(ch, p_total, 100);
    const double mine = balanced_bound(r.gammas);
    INFO("instance " << inst << " grid " << grid << " gp " << mine);
    CHECK(mine >= grid - 0.01 * std::abs(grid));
  }
}

TEST_CASE("rate is non-decreasing in the budget") {
  for (int inst = 0; inst < 5; ++inst) {
    const auto ch = testsupport::channels(4, 4, 1, 1, 800 + inst);
    double prev = -1.0;
    for (double dbm : {0.0, 7.5, 15.0, 22.5, 30.0}) {
      const double rs = maximize_rate(ch, Budget::global(scenario::dbm_to_linear(dbm)), kNoise).secrecy.rate;
      CHECK(rs >= prev - 1e-9);
      prev = rs;
    }
  }
}

TEST_CASE("jamming never hurts") {
  for (int inst = 0; inst < 20; ++inst) {
    const auto ch = testsupport::channels(4, 4, 1, 1, 900 + inst);
    Options off;
    off.allow_jamming = false;
    const auto with = maximize_rate(ch, Budget::global(10.0), kNoise);
    const auto without = maximize_rate(ch, Budget::global(10.0), kNoise, off);
    CHECK(without.powers.p_b == 0.0);
    CHECK(without.powers.p_a2 == 0.0);
    CHECK(with.secrecy.rate >= without.secrecy.rate - 1e-8);
  }
}

TEST_CASE("power modes respect their constraints") {
  for (int inst = 0; inst < 10; ++inst) {
    const auto ch = testsupport::channels(4, 4, 1, 1, 1000 + inst);
    const auto g = maximize_rate(ch, Budget::global(10.0), kNoise);
    CHECK(g.powers.p_a + g.powers.p_b <= 10.0 * (1 + 1e-9));
    CHECK(g.powers.p_r + g.powers.p_a2 <= 10.0 * (1 + 1e-9));
    const auto i = maximize_rate(ch, Budget::individual(10.0), kNoise);
    for (double v : {i.powers.p_a, i.powers.p_b, i.powers.p_r, i.powers.p_a2}) CHECK(v <= 5.0 * (1 + 1e-9));
    const auto u = maximize_rate(ch, Budget::uniform(10.0), kNoise);
    CHECK(u.powers.p_a == 5.0);
    CHECK(u.powers.p_b == 5.0);
  }
}

TEST_CASE("single bob antenna disables phase-one jamming") {
  const auto ch = testsupport::channels(2, 1, 1, 1, 1100);
  const auto r = maximize_rate(ch, Budget::global(1.0), kNoise);
  CHECK(r.bob_pinned);
  CHECK(r.powers.p_b == 0.0);
}

TEST_CASE("minimum power for zero rate is zero") {
  const auto ch = testsupport::channels(2, 2, 1, 1, 1200);
  const auto r = minimize_power(ch, 0.0, kNoise, PowerMode::Global);
  CHECK(r.feasible);
  CHECK(r.powers.p_a == 0.0);
  CHECK(r.powers.p_r == 0.0);
}

TEST_CASE("minimum power round-trips through maximize_rate") {
  for (int inst = 0; inst < 5; ++inst) {
    const auto ch = testsupport::channels(4, 4, 1, 1, 1300 + inst);
    for (auto mode : {PowerMode::Global, PowerMode::Individual}) {
      const double target = 1.0;
      const auto pm = minimize_power(ch, target, kNoise, mode);
      REQUIRE(pm.feasible);
      CHECK(pm.achieved_rate >= target - 1e-6);
      const Budget b = mode == PowerMode::Global ? Budget::global(pm.objective)
                                                 : Budget{PowerMode::Individual, 2 * pm.objective, pm.objective,
                                                          pm.objective, pm.objective};
      CHECK(maximize_rate(ch, b, kNoise).secrecy.rate >= target - 1e-4);
    }
  }
}

TEST_CASE("minimum power matches a bisection over the exact rate on a budget grid") {
  const auto ch = testsupport::channels(2, 2, 1, 1, 1400);
  const double target = 2.0;
  const auto pm = minimize_power(ch, target, kNoise, PowerMode::Global);
  REQUIRE(pm.feasible);
  // Scan budgets on a fine log grid: the first budget whose grid-search bound reaches the target.
  double first = -1.0;
  for (int i = 0; i <= 400 && first < 0.0; ++i) {
    const double p = 1e-4 * std::pow(10.0, i / 100.0);
    if (grid_best_bound(ch, p, 40) >= target) first = p;
  }
  REQUIRE(first > 0.0);
  CHECK(pm.objective <= first * 1.01 * std::pow(10.0, 0.01));
}

TEST_CASE("closed-form rank-one jammer beats random covariances") {
  int total_violations = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const auto ch = testsupport::channels(3, 4, 1, 2, 1500 + inst);
    const CVec t_a = info_beamformer(ch, 1.0, kNoise);
    const auto rep = rank_one_optimality_check(ch, t_a, 1.0, 0.5, kNoise, 200, 77 + inst);
    CHECK(rep.samples == 200);
    total_violations += rep.violations;
    CHECK(rep.uniform_gamma > rep.closed_form_gamma);
  }
  CHECK(total_violations == 0);
}

TEST_CASE("rank-one covariance reproduces its own gamma") {
  const auto ch = testsupport::channels(3, 4, 1, 2, 1600);
  const CVec t_a = info_beamformer(ch, 1.0, kNoise);
  const double p_b = 0.5;
  const Jammer j = bob_jammer(ch, t_a, p_b, kNoise);
  const Powers p{1.0, p_b, 1.0, 0.0};
  const double direct = sinrs(ch, build_beamformers(ch, t_a, p, kNoise), p, kNoise).ae;
  const double cov = gamma_ae_with_covariance(ch, t_a, 1.0, p_b * j.t * j.t.adjoint(), kNoise);
  CHECK(std::abs(direct - cov) <= 1e-12 * direct + 1e-12);
}
