#include "secjam/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace secjam::scenario {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void NetworkGeometry::validate() const {
  if (na < 1 || nb < 1 || nr < 1 || ne < 1) throw ArgumentError("geometry: antenna counts must be >= 1");
  if (!(path_loss_exponent > 0.0)) throw ArgumentError("geometry: path-loss exponent must be positive");
  if (!std::isfinite(noise_dbm)) throw ArgumentError("geometry: noise power must be finite");
  const std::pair<const Point*, const Point*> links[] = {
      {&alice, &relay}, {&alice, &eve}, {&relay, &bob}, {&relay, &eve}, {&bob, &eve}, {&alice, &bob}};
  for (const auto& [p, q] : links) {
    const double d = distance(*p, *q);
    if (!(d > 0.0) || !std::isfinite(d)) throw ArgumentError("geometry: coincident or invalid node positions");
  }
}

double NetworkGeometry::noise_mw() const { return dbm_to_linear(noise_dbm); }

double NetworkGeometry::link_variance(double d) const { return std::pow(d, -path_loss_exponent); }

bool ChannelSet::operator==(const ChannelSet& o) const {
  return H_ar == o.H_ar && H_ae == o.H_ae && H_rb == o.H_rb && H_re == o.H_re && H_br == o.H_br &&
         H_be == o.H_be && H_ab == o.H_ab;
}

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform on the open interval (0, 1) from 64 random bits.
inline double open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

Philox4x32::Key Philox4x32::key_from_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

std::array<double, 2> gaussian_pair(std::uint64_t seed, std::uint32_t stream, std::uint32_t index) {
  const auto out = Philox4x32::block({index, stream, 0u, 0u}, Philox4x32::key_from_seed(seed));
  const std::uint64_t b0 = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const std::uint64_t b1 = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  const double radius = std::sqrt(-2.0 * std::log(open_unit(b0)));
  const double angle = 2.0 * M_PI * open_unit(b1);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::uint64_t trial_seed(std::uint64_t seed_base, std::uint64_t trial) {
  return splitmix64(splitmix64(seed_base) ^ trial);
}

namespace {

CMat draw_link(std::uint64_t seed, std::uint32_t stream, int rows, int cols, double variance) {
  const double scale = std::sqrt(0.5 * variance);
  CMat h(rows, cols);
  std::uint32_t idx = 0;
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const auto g = gaussian_pair(seed, stream, idx++);
      h(i, j) = {scale * g[0], scale * g[1]};
    }
  }
  return h;
}

}  // namespace

ChannelSet draw_channels(const NetworkGeometry& g, std::uint64_t seed) {
  g.validate();
  auto var = [&](const Point& p, const Point& q) { return g.link_variance(distance(p, q)); };
  ChannelSet c;
  c.H_ar = draw_link(seed, 0, g.nr, g.na, var(g.alice, g.relay));
  c.H_ae = draw_link(seed, 1, g.ne, g.na, var(g.alice, g.eve));
  c.H_rb = draw_link(seed, 2, g.nb, g.nr, var(g.relay, g.bob));
  c.H_re = draw_link(seed, 3, g.ne, g.nr, var(g.relay, g.eve));
  c.H_br = draw_link(seed, 4, g.nr, g.nb, var(g.bob, g.relay));
  c.H_be = draw_link(seed, 5, g.ne, g.nb, var(g.bob, g.eve));
  c.H_ab = draw_link(seed, 6, g.nb, g.na, var(g.alice, g.bob));
  return c;
}

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }

double linear_to_dbm(double mw) { return 10.0 * std::log10(mw); }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
}

Point parse_point(const KeyValueConfig& kv, const std::string& key, Point fallback) {
  if (!kv.has(key)) return fallback;
  const auto v = kv.get_doubles(key);
  if (v.size() != 2) throw ConfigError("config: '" + key + "' expects 'x, y'");
  return {v[0], v[1]};
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv.entries_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse(in);
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config: missing key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_double(key, get(key)) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const double v = parse_double(key, get(key));
  if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError("config: '" + key + "' expects an integer");
  return static_cast<long long>(v);
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) out.push_back(parse_double(key, item));
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { entries_[key] = value; }

ScenarioConfig scenario_from(const KeyValueConfig& kv) {
  ScenarioConfig sc;
  auto& g = sc.geometry;
  g.alice = parse_point(kv, "alice", g.alice);
  g.bob = parse_point(kv, "bob", g.bob);
  g.relay = parse_point(kv, "relay", g.relay);
  g.eve = parse_point(kv, "eve", g.eve);
  if (kv.has("antennas")) {
    const auto a = kv.get_doubles("antennas");
    if (a.size() != 4) throw ConfigError("config: 'antennas' expects 'na, nb, nr, ne'");
    g.na = static_cast<int>(a[0]);
    g.nb = static_cast<int>(a[1]);
    g.nr = static_cast<int>(a[2]);
    g.ne = static_cast<int>(a[3]);
  }
  g.na = static_cast<int>(kv.get_int("na", g.na));
  g.nb = static_cast<int>(kv.get_int("nb", g.nb));
  g.nr = static_cast<int>(kv.get_int("nr", g.nr));
  g.ne = static_cast<int>(kv.get_int("ne", g.ne));
  g.path_loss_exponent = kv.get_double("path_loss_exponent", g.path_loss_exponent);
  g.noise_dbm = kv.get_double("noise_dbm", g.noise_dbm);
  if (kv.has("power_dbm")) sc.power_dbm = kv.get_doubles("power_dbm");
  sc.trials = kv.get_int("trials", sc.trials);
  const long long seed = kv.get_int("seed_base", static_cast<long long>(sc.seed_base));
  if (seed < 0) throw ConfigError("config: 'seed_base' must be nonnegative");
  sc.seed_base = static_cast<std::uint64_t>(seed);
  if (sc.power_dbm.empty()) throw ConfigError("config: 'power_dbm' is empty");
  if (sc.trials < 1) throw ConfigError("config: 'trials' must be >= 1");
  try {
    g.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return sc;
}

}  // namespace secjam::scenario
