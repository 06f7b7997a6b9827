#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "secjam/types.hpp"

namespace secjam::scenario {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

/// Node layout (km), antenna counts, path-loss exponent and noise floor.
struct NetworkGeometry {
  Point alice{-0.5, 0.0};
  Point bob{0.5, 0.0};
  Point relay{0.0, 0.0};
  Point eve{0.0, -0.5};
  int na = 1;
  int nb = 1;
  int nr = 1;
  int ne = 1;
  double path_loss_exponent = 3.0;
  double noise_dbm = -60.0;

  void validate() const;
  double noise_mw() const;
  /// Per-entry variance of a link with distance d.
  double link_variance(double d) const;
};

/// One realization of every link used by the relaying schemes.
struct ChannelSet {
  CMat H_ar;  // relay <- alice (nr x na)
  CMat H_ae;  // eve <- alice (ne x na)
  CMat H_rb;  // bob <- relay (nb x nr)
  CMat H_re;  // eve <- relay (ne x nr)
  CMat H_br;  // relay <- bob (nr x nb)
  CMat H_be;  // eve <- bob (ne x nb)
  CMat H_ab;  // bob <- alice (nb x na)

  bool operator==(const ChannelSet& other) const;
};

/// Philox4x32-10 counter-based generator.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
  static Key key_from_seed(std::uint64_t seed);
};

/// Two independent standard normals derived from one counter block.
std::array<double, 2> gaussian_pair(std::uint64_t seed, std::uint32_t stream, std::uint32_t index);

/// Mixes a base seed with a trial index into a per-trial seed.
std::uint64_t trial_seed(std::uint64_t seed_base, std::uint64_t trial);

ChannelSet draw_channels(const NetworkGeometry& geom, std::uint64_t seed);

double dbm_to_linear(double dbm);
double linear_to_dbm(double mw);

/// Malformed configuration text or values.
class ConfigError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Flat `key = value` map with `#` comments; later duplicates override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_string(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Geometry plus the Monte-Carlo frame shared by every experiment.
struct ScenarioConfig {
  NetworkGeometry geometry;
  std::vector<double> power_dbm{10.0};
  long long trials = 500;
  std::uint64_t seed_base = 1;
};

ScenarioConfig scenario_from(const KeyValueConfig& kv);

}  // namespace secjam::scenario
