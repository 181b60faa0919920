#pragma once

// JSON mapping of the HTTP API bodies.

#include <string>

#include <nlohmann/json.hpp>

#include "urbanscore/persistence/store.hpp"
#include "urbanscore/service/engine.hpp"
#include "urbanscore/service/stats.hpp"

namespace urbanscore::service {

using nlohmann::json;

/// Serialises with '<', '>' and '&' escaped as <, >, & so the
/// body is inert if a browser ever renders it as HTML.
std::string encode(const json& body);

json to_json(const scoring::SubScores& sub);
/// Object keyed by component name.
json weights_to_json(const scoring::WeightVector& w);
/// Array of six numbers or object keyed by component name (all six required).
scoring::WeightVector weights_from_json(const json& j);

json to_json(const explain::Explanation& e);
json to_json(const ScoreReport& report);
json to_json(const persistence::LocationScoreRecord& r);
json to_json(const persistence::UserProfileRecord& r);
json to_json(const persistence::FavouriteRecord& r);
json to_json(const StatsReport& s);

/// {"address": "..."} or {"point": {"lat", "lon"}}, optional "radius_m",
/// "profile": {"weights", "traffic_sensitive"}, "locale".
/// Throws Error(InvalidRequest).
EvaluateRequest evaluate_request_from_json(const json& j);

struct ProfileUpdate {
  scoring::WeightVector weights = scoring::kDefaultWeights;
  bool traffic_sensitive = false;
  persistence::Purpose purpose = persistence::Purpose::Residence;
};

/// {"weights", "traffic_sensitive", "declared_purpose"}. Throws InvalidRequest.
ProfileUpdate profile_update_from_json(const json& j);

}  // namespace urbanscore::service
