#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbanscore/clock.hpp"
#include "urbanscore/geodata/facilities.hpp"
#include "urbanscore/geodata/transport.hpp"
#include "urbanscore/geodata/types.hpp"

namespace urbanscore {
class Config;
}

namespace urbanscore::geodata {

// Provider contracts. Public entry points check preconditions and delegate to
// the implementation hook. Implementations are stateless per call and safe to
// share between concurrent evaluations.

class GeocodingProvider {
 public:
  virtual ~GeocodingProvider() = default;

  /// NotFound for empty input or empty result set.
  ResolvedAddress forward(std::string_view query);
  ResolvedAddress reverse(const GeoPoint& point);

 protected:
  virtual ResolvedAddress do_forward(const std::string& query) = 0;
  virtual ResolvedAddress do_reverse(const GeoPoint& point) = 0;
};

class FacilityProvider {
 public:
  virtual ~FacilityProvider() = default;

  /// Requires 100 <= radius_m <= 5000.
  std::vector<Facility> fetch(const GeoPoint& center, double radius_m);

 protected:
  virtual std::vector<Facility> do_fetch(const GeoPoint& center, double radius_m) = 0;
};

class TrafficProvider {
 public:
  virtual ~TrafficProvider() = default;

  TrafficSample fetch(const GeoPoint& point);

 protected:
  virtual TrafficSample do_fetch(const GeoPoint& point) = 0;
};

class AirQualityProvider {
 public:
  virtual ~AirQualityProvider() = default;

  /// Requires 1 <= window_days <= 365.
  std::vector<PollutantSeries> fetch_history(const GeoPoint& point, int window_days = 90);

 protected:
  virtual std::vector<PollutantSeries> do_fetch_history(const GeoPoint& point, int window_days) = 0;
};

struct Providers {
  std::shared_ptr<GeocodingProvider> geocoding;
  std::shared_ptr<FacilityProvider> facilities;
  std::shared_ptr<TrafficProvider> traffic;
  std::shared_ptr<AirQualityProvider> air;
};

// --- live HTTP --------------------------------------------------------------

/// Maps a non-2xx status to an error: 5xx and 429 are ProviderUnavailable,
/// other statuses MalformedResponse.
void check_status(const HttpResponse& response, std::string_view provider);

class LiveGeocodingProvider final : public GeocodingProvider {
 public:
  LiveGeocodingProvider(std::shared_ptr<HttpTransport> transport, std::string base_url);

 protected:
  ResolvedAddress do_forward(const std::string& query) override;
  ResolvedAddress do_reverse(const GeoPoint& point) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string base_url_;
};

class LiveFacilityProvider final : public FacilityProvider {
 public:
  LiveFacilityProvider(std::shared_ptr<HttpTransport> transport, std::string base_url,
                       EducationRules rules = {});

 protected:
  std::vector<Facility> do_fetch(const GeoPoint& center, double radius_m) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string base_url_;
  EducationRules rules_;
};

class LiveTrafficProvider final : public TrafficProvider {
 public:
  LiveTrafficProvider(std::shared_ptr<HttpTransport> transport, std::string base_url,
                      std::string api_key);

 protected:
  TrafficSample do_fetch(const GeoPoint& point) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string base_url_;
  std::string api_key_;
};

class LiveAirQualityProvider final : public AirQualityProvider {
 public:
  LiveAirQualityProvider(std::shared_ptr<HttpTransport> transport, std::string base_url,
                         std::string api_key, std::shared_ptr<const Clock> clock);

 protected:
  std::vector<PollutantSeries> do_fetch_history(const GeoPoint& point, int window_days) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string base_url_;
  std::string api_key_;
  std::shared_ptr<const Clock> clock_;
};

// --- fixture replay -----------------------------------------------------------

/// One recorded provider call:
/// `{"request": {"op": ..., "params": {...}}, "response": <raw body>, "recorded_at": "..."}`
struct FixtureRecord {
  std::string provider;
  std::string op;
  nlohmann::json params;
  nlohmann::json response;
  std::string recorded_at;
  std::filesystem::path file;
};

/// Recordings loaded from `<dir>/<provider>/<name>.json`.
class FixtureStore {
 public:
  static std::shared_ptr<const FixtureStore> load(const std::filesystem::path& dir);

  /// Numbers in params match within 1e-5 (coordinates are recorded at 6 dp);
  /// other values must be equal.
  const FixtureRecord* find(std::string_view provider, std::string_view op,
                            const nlohmann::json& params) const;
  std::vector<const FixtureRecord*> all(std::string_view provider, std::string_view op) const;

  void add(FixtureRecord record);
  std::size_t size() const { return records_.size(); }

  static bool params_match(const nlohmann::json& recorded, const nlohmann::json& requested);

 private:
  std::vector<FixtureRecord> records_;
};

class FixtureGeocodingProvider final : public GeocodingProvider {
 public:
  explicit FixtureGeocodingProvider(std::shared_ptr<const FixtureStore> store);

 protected:
  ResolvedAddress do_forward(const std::string& query) override;
  ResolvedAddress do_reverse(const GeoPoint& point) override;

 private:
  std::shared_ptr<const FixtureStore> store_;
};

/// Replays an exact-radius recording, or a larger-radius recording at the same
/// center (the circular post-filter trims it).
class FixtureFacilityProvider final : public FacilityProvider {
 public:
  FixtureFacilityProvider(std::shared_ptr<const FixtureStore> store, EducationRules rules = {});

 protected:
  std::vector<Facility> do_fetch(const GeoPoint& center, double radius_m) override;

 private:
  std::shared_ptr<const FixtureStore> store_;
  EducationRules rules_;
};

class FixtureTrafficProvider final : public TrafficProvider {
 public:
  explicit FixtureTrafficProvider(std::shared_ptr<const FixtureStore> store);

 protected:
  TrafficSample do_fetch(const GeoPoint& point) override;

 private:
  std::shared_ptr<const FixtureStore> store_;
};

class FixtureAirQualityProvider final : public AirQualityProvider {
 public:
  explicit FixtureAirQualityProvider(std::shared_ptr<const FixtureStore> store);

 protected:
  std::vector<PollutantSeries> do_fetch_history(const GeoPoint& point, int window_days) override;

 private:
  std::shared_ptr<const FixtureStore> store_;
};

EducationRules education_rules_from(const Config& cfg);

/// `providers.mode = live` builds HTTP clients from the configured URLs and
/// keys; `fixtures` replays recordings from `providers.fixtures_dir`.
Providers make_providers(const Config& cfg, std::shared_ptr<const Clock> clock);

}  // namespace urbanscore::geodata
