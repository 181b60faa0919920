#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "urbanscore/clock.hpp"
#include "urbanscore/explain/explain.hpp"
#include "urbanscore/geodata/providers.hpp"
#include "urbanscore/persistence/store.hpp"
#include "urbanscore/resilience/gateway.hpp"
#include "urbanscore/scoring/scoring.hpp"

namespace urbanscore {
class Config;
}

namespace urbanscore::service {

using resilience::Feed;
using resilience::Freshness;

/// Exactly one of `address` / `point`. The profile comes from `profile` when
/// given, else from the stored profile of `user_id`, else the defaults.
struct EvaluateRequest {
  std::optional<std::string> address;
  std::optional<GeoPoint> point;
  double radius_m = geodata::kDefaultRadiusM;
  std::optional<scoring::PreferenceProfile> profile;
  std::optional<std::string> user_id;
  std::optional<std::string> locale;

  /// Throws Error(InvalidRequest).
  void validate() const;
};

struct ScoreReport {
  persistence::Id location_id = 0;
  geodata::ResolvedAddress location;
  double radius_m = geodata::kDefaultRadiusM;
  scoring::SubScores sub_scores;
  /// Normalized weights actually applied (traffic factor included).
  scoring::WeightVector weights{};
  bool traffic_sensitive = false;
  int aggregate = 0;
  std::string profile_hash;
  /// Feeds that were served stale or replaced by the neutral fallback.
  std::set<Feed> degraded;
  /// How each feed was obtained: live, cached, stale, or missing.
  std::map<Feed, std::string> feed_status;
  geodata::FacilitySummary facilities;
  int traffic_samples = 0;
  explain::Explanation explanation;
  /// Milliseconds per stage: geocode, fanout, facilities, traffic, air,
  /// scoring, persist, explain, total.
  std::map<std::string, double> timings;
  Timestamp evaluated_at;
};

/// District used for statistics: suburb, city district, then city.
std::string district_of(const geodata::ResolvedAddress& address);

/// Ten nearest named facilities, nearest first.
std::vector<explain::TopFacility> top_facilities(const std::vector<geodata::Facility>& facilities);

struct EngineParts {
  geodata::Providers providers;
  std::shared_ptr<resilience::ResilientGateway> gateway;
  std::shared_ptr<persistence::Store> store;
  std::shared_ptr<explain::Explainer> explainer;
  std::shared_ptr<const Clock> clock;
  scoring::CalibrationConstants calibration;
  scoring::PollutantModel pollutants = scoring::PollutantModel::defaults();
  int air_window_days = 90;
  std::string default_locale = "ro";
};

/// Evaluation pipeline: geocode, concurrent facility / traffic / air fetches,
/// scoring, persistence, explanation. Safe for concurrent evaluations.
class Engine {
 public:
  explicit Engine(EngineParts parts);

  /// GeocodeFailed when an address cannot be resolved (no other call is
  /// made); InvalidRequest for malformed requests. Failed feeds degrade to a
  /// zero sub-score and are listed in `degraded`.
  ScoreReport evaluate(const EvaluateRequest& request);

  /// Stored profile of the user, or the defaults.
  scoring::PreferenceProfile profile_for(const std::optional<std::string>& user_id);

  persistence::Store& store() { return *parts_.store; }
  resilience::ResilientGateway& gateway() { return *parts_.gateway; }
  explain::Explainer& explainer() { return *parts_.explainer; }
  const Clock& clock() const { return *parts_.clock; }
  const EngineParts& parts() const { return parts_; }

 private:
  geodata::ResolvedAddress resolve(const EvaluateRequest& request, ScoreReport& report);

  EngineParts parts_;
};

/// Builds providers, gateway, store and explainer from configuration. A
/// shared cache may be passed in so several engines share one.
std::unique_ptr<Engine> make_engine(const Config& cfg, std::shared_ptr<const Clock> clock,
                                    std::shared_ptr<resilience::SharedCache> shared_cache = nullptr);

}  // namespace urbanscore::service
