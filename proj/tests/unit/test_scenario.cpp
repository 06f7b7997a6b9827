#include <doctest.h>

#include <cmath>

#include "secjam/scenario.hpp"

using namespace secjam;
using namespace secjam::scenario;

TEST_CASE("philox known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("dbm conversion") {
  CHECK(dbm_to_linear(-60.0) == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(dbm_to_linear(0.0) == 1.0);
  CHECK(dbm_to_linear(10.0) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(linear_to_dbm(dbm_to_linear(17.5)) == doctest::Approx(17.5));
}

TEST_CASE("default layout relay link variance") {
  NetworkGeometry g;
  CHECK(g.link_variance(distance(g.alice, g.relay)) == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("channel shapes and determinism") {
  NetworkGeometry g;
  g.na = 4;
  g.nb = 3;
  g.nr = 2;
  g.ne = 5;
  const auto c1 = draw_channels(g, 42);
  const auto c2 = draw_channels(g, 42);
  const auto c3 = draw_channels(g, 43);
  CHECK(c1 == c2);
  CHECK_FALSE(c1 == c3);
  CHECK(c1.H_ar.rows() == 2);
  CHECK(c1.H_ar.cols() == 4);
  CHECK(c1.H_ae.rows() == 5);
  CHECK(c1.H_ae.cols() == 4);
  CHECK(c1.H_rb.rows() == 3);
  CHECK(c1.H_rb.cols() == 2);
  CHECK(c1.H_re.rows() == 5);
  CHECK(c1.H_re.cols() == 2);
  CHECK(c1.H_br.rows() == 2);
  CHECK(c1.H_br.cols() == 3);
  CHECK(c1.H_be.rows() == 5);
  CHECK(c1.H_be.cols() == 3);
  CHECK(c1.H_ab.rows() == 3);
  CHECK(c1.H_ab.cols() == 4);
}

TEST_CASE("coincident nodes are rejected") {
  NetworkGeometry g;
  g.eve = g.relay;
  CHECK_THROWS_AS(draw_channels(g, 1), ArgumentError);
}

TEST_CASE("entry variance follows the path-loss law") {
  NetworkGeometry g;
  g.alice = {-1.0, 0.0};
  g.relay = {0.0, 0.0};
  g.bob = {0.5, 0.0};
  g.eve = {0.0, -2.0};
  const int draws = 100000;
  double far = 0.0, near = 0.0;
  for (int t = 0; t < draws; ++t) {
    const auto c = draw_channels(g, trial_seed(7, static_cast<std::uint64_t>(t)));
    far += std::norm(c.H_ar(0, 0));
    near += std::norm(c.H_rb(0, 0));
  }
  far /= draws;
  near /= draws;
  CHECK(std::abs(far - 1.0) <= 0.03);
  CHECK(std::abs(near / far - 8.0) <= 0.05 * 8.0);
}

TEST_CASE("distinct seeds give uncorrelated draws") {
  NetworkGeometry g;
  const int draws = 100000;
  cplx cross = 0.0;
  double pa = 0.0, pb = 0.0;
  for (int t = 0; t < draws; ++t) {
    const auto a = draw_channels(g, trial_seed(1, static_cast<std::uint64_t>(t)));
    const auto b = draw_channels(g, trial_seed(2, static_cast<std::uint64_t>(t)));
    cross += a.H_ar(0, 0) * std::conj(b.H_ar(0, 0));
    pa += std::norm(a.H_ar(0, 0));
    pb += std::norm(b.H_ar(0, 0));
  }
  CHECK(std::abs(cross) / std::sqrt(pa * pb) < 0.02);
}

TEST_CASE("config parsing") {
  const auto kv = KeyValueConfig::parse_string(
      "# layout\n"
      "alice = -0.5, 0\n"
      "eve = 0.25, -0.5   # comment\n"
      "antennas = 4, 4, 1, 2\n"
      "power_dbm = 0, 10, 20\n"
      "trials = 12\n"
      "seed_base = 99\n");
  const auto sc = scenario_from(kv);
  CHECK(sc.geometry.eve.x == 0.25);
  CHECK(sc.geometry.na == 4);
  CHECK(sc.geometry.ne == 2);
  CHECK(sc.power_dbm.size() == 3);
  CHECK(sc.trials == 12);
  CHECK(sc.seed_base == 99u);

  CHECK_THROWS_AS(KeyValueConfig::parse_string("novalue\n"), ConfigError);
  CHECK_THROWS_AS(scenario_from(KeyValueConfig::parse_string("trials = abc\n")), ConfigError);
  CHECK_THROWS_AS(scenario_from(KeyValueConfig::parse_string("eve = 0, 0\n")), ConfigError);
  CHECK_THROWS_AS(scenario_from(KeyValueConfig::parse_string("antennas = 1, 2\n")), ConfigError);
}
