#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace urbanscore {

/// Flat `key = value` configuration document.
///
/// Lines starting with '#' are comments. Keys are dotted (`scoring.surface_k`).
/// Every key can be overridden from the environment: `scoring.surface_k` maps to
/// `URBANSCORE_SCORING_SURFACE_K`.
class Config {
 public:
  Config() = default;

  /// Documented defaults for every key the engine reads.
  static Config defaults();
  static Config parse(std::string_view text);
  /// defaults() overlaid with the file's values.
  static Config load(const std::filesystem::path& path);

  /// Overlays URBANSCORE_* environment variables for all keys known to this
  /// document. Returns the number of overrides applied.
  int apply_env();

  void merge(const Config& other);
  void set(std::string key, std::string value);
  bool contains(std::string_view key) const;

  std::optional<std::string> get(std::string_view key) const;
  std::string get_string(std::string_view key, std::string_view fallback = {}) const;
  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  /// Comma-separated list, items trimmed, empties dropped.
  std::vector<std::string> get_list(std::string_view key) const;

  std::string dump() const;
  void save(const std::filesystem::path& path) const;

  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

  static std::string env_name(std::string_view key);

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace urbanscore
