#include "urbanscore/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "urbanscore/error.hpp"

#ifndef URBANSCORE_DATA_DIR
#define URBANSCORE_DATA_DIR "data"
#endif

namespace urbanscore {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Config Config::defaults() {
  Config c;
  const std::pair<const char*, const char*> entries[] = {
      {"providers.mode", "live"},
      {"providers.fixtures_dir", ""},
      {"providers.timeout_ms", "5000"},
      {"providers.geocode.url", "https://nominatim.openstreetmap.org"},
      {"providers.facilities.url", "https://overpass-api.de/api/interpreter"},
      {"providers.traffic.url", "https://api.tomtom.com"},
      {"providers.traffic.key", ""},
      {"providers.air.url", "https://api.openweathermap.org"},
      {"providers.air.key", ""},
      {"cache.ttl.geocode_s", "86400"},
      {"cache.ttl.facilities_s", "600"},
      {"cache.ttl.traffic_s", "60"},
      {"cache.ttl.air_s", "3600"},
      {"cache.shared", "memory"},
      {"cache.shared_url", "http://127.0.0.1:6380"},
      {"backoff.base_delay_ms", "200"},
      {"backoff.multiplier", "2.0"},
      {"backoff.max_attempts", "3"},
      {"breaker.failure_threshold", "3"},
      {"breaker.open_duration_s", "60"},
      {"scoring.air.weight.pm25", "0.30"},
      {"scoring.air.weight.pm10", "0.20"},
      {"scoring.air.weight.co", "0.05"},
      {"scoring.air.weight.no2", "0.05"},
      {"scoring.air.weight.o3", "0.05"},
      {"scoring.air.weight.nh3", "0.05"},
      {"scoring.air.threshold.pm25", "15"},
      {"scoring.air.threshold.pm10", "45"},
      {"scoring.air.threshold.co", "4000"},
      {"scoring.air.threshold.no2", "25"},
      {"scoring.air.threshold.o3", "100"},
      {"scoring.air.threshold.nh3", "100"},
      {"scoring.lifestyle_count_ref", "60"},
      {"scoring.lifestyle_w_count", "0.6"},
      {"scoring.lifestyle_w_entropy", "0.4"},
      {"scoring.education.weight.kindergarten", "0.25"},
      {"scoring.education.weight.primary", "0.40"},
      {"scoring.education.weight.high", "0.60"},
      {"scoring.education_decay_m", "1000"},
      {"scoring.metro_full_m", "200"},
      {"scoring.metro_zero_m", "1000"},
      {"scoring.surface_k", "26.5"},
      {"scoring.surface_ref_routes", "8"},
      {"geodata.highschool_keywords", "liceu,liceul,colegiul,colegiu national"},
      {"geodata.default_radius_m", "800"},
      {"storage.backend", "file"},
      {"storage.path", "urbanscore.db"},
      {"storage.flush_interval_ms", "1000"},
      {"storage.batch_size", "64"},
      {"explain.url", ""},
      {"explain.key", ""},
      {"explain.model", "gpt-4o-mini"},
      {"explain.locale", "ro"},
      {"explain.data_dir", URBANSCORE_DATA_DIR},
      {"explain.cache_ttl_s", "86400"},
      {"server.bind", "0.0.0.0"},
      {"server.port", "8080"},
      {"log.level", "info"},
  };
  for (const auto& [k, v] : entries) c.values_.emplace(k, v);
  return c;
}

Config Config::parse(std::string_view text) {
  Config c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty())
      fail(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": empty key");
    c.values_[std::move(key)] = trim(std::string_view(t).substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Config c = defaults();
  c.merge(parse(buf.str()));
  return c;
}

std::string Config::env_name(std::string_view key) {
  std::string out = "URBANSCORE_";
  for (char ch : key) {
    out.push_back(ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  }
  return out;
}

int Config::apply_env() {
  int applied = 0;
  for (auto& [key, value] : values_) {
    if (const char* v = std::getenv(env_name(key).c_str())) {
      value = v;
      ++applied;
    }
  }
  return applied;
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

void Config::set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

bool Config::contains(std::string_view key) const { return values_.find(key) != values_.end(); }

std::optional<std::string> Config::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(std::string_view key, std::string_view fallback) const {
  auto v = get(key);
  return v ? *v : std::string(fallback);
}

double Config::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  if (!v || v->empty()) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "config key " + std::string(key) + " is not a number: " + *v);
  }
}

long long Config::get_int(std::string_view key, long long fallback) const {
  auto v = get(key);
  if (!v || v->empty()) return fallback;
  try {
    std::size_t used = 0;
    const long long n = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    return n;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "config key " + std::string(key) + " is not an integer: " + *v);
  }
}

bool Config::get_bool(std::string_view key, bool fallback) const {
  auto v = get(key);
  if (!v || v->empty()) return fallback;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  fail(ErrorCode::InvalidArgument, "config key " + std::string(key) + " is not a boolean: " + *v);
}

std::vector<std::string> Config::get_list(std::string_view key) const {
  std::vector<std::string> out;
  auto v = get(key);
  if (!v) return out;
  std::string cur;
  std::istringstream in(*v);
  while (std::getline(in, cur, ',')) {
    auto t = trim(cur);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void Config::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write config file " + path.string());
  out << "# urbanscore configuration\n" << dump();
}

}  // namespace urbanscore
