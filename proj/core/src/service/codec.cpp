#include "urbanscore/service/codec.hpp"

#include "urbanscore/error.hpp"
#include "urbanscore/geodata/codec.hpp"

namespace urbanscore::service {

std::string encode(const json& body) {
  const std::string raw = body.dump();
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '<': out += "\\u003c"; break;
      case '>': out += "\\u003e"; break;
      case '&': out += "\\u0026"; break;
      default: out += c;
    }
  }
  return out;
}

json to_json(const scoring::SubScores& sub) {
  json j = json::object();
  for (auto c : scoring::kAllComponents) j[std::string(scoring::to_string(c))] = sub.get(c);
  return j;
}

json weights_to_json(const scoring::WeightVector& w) {
  json j = json::object();
  for (auto c : scoring::kAllComponents) j[std::string(scoring::to_string(c))] = w[static_cast<std::size_t>(c)];
  return j;
}

scoring::WeightVector weights_from_json(const json& j) {
  scoring::WeightVector w{};
  try {
    if (j.is_array()) {
      if (j.size() != w.size()) fail(ErrorCode::InvalidRequest, "weights must have six entries");
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = j.at(i).get<double>();
    } else if (j.is_object()) {
      for (auto c : scoring::kAllComponents)
        w[static_cast<std::size_t>(c)] = j.at(std::string(scoring::to_string(c))).get<double>();
    } else {
      fail(ErrorCode::InvalidRequest, "weights must be an array or an object");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidRequest, std::string("bad weights: ") + e.what());
  }
  return w;
}

json to_json(const explain::Explanation& e) {
  return {{"text", e.text},
          {"word_count", e.word_count},
          {"source", std::string(explain::to_string(e.source))},
          {"grounded", e.grounded},
          {"generated_at", to_iso8601(e.generated_at)}};
}

json to_json(const ScoreReport& r) {
  json degraded = json::array();
  for (auto f : r.degraded) degraded.push_back(std::string(resilience::to_string(f)));
  json feeds = json::object();
  for (const auto& [f, status] : r.feed_status) feeds[std::string(resilience::to_string(f))] = status;
  json facilities;
  geodata::to_json(facilities, r.facilities);
  json location;
  geodata::to_json(location, r.location);
  return {{"location_id", r.location_id},
          {"location", location},
          {"radius_m", r.radius_m},
          {"sub_scores", to_json(r.sub_scores)},
          {"weights", weights_to_json(r.weights)},
          {"traffic_sensitive", r.traffic_sensitive},
          {"aggregate", r.aggregate},
          {"profile_hash", r.profile_hash},
          {"degraded", degraded},
          {"feeds", feeds},
          {"facilities", facilities},
          {"traffic_samples", r.traffic_samples},
          {"explanation", to_json(r.explanation)},
          {"timings_ms", r.timings},
          {"evaluated_at", to_iso8601(r.evaluated_at)}};
}

json to_json(const persistence::LocationScoreRecord& r) {
  return {{"id", r.id},
          {"location_id", r.location_id},
          {"sub_scores", to_json(r.sub_scores)},
          {"aggregate", r.aggregate},
          {"profile_hash", r.profile_hash},
          {"evaluated_at", to_iso8601(r.evaluated_at)}};
}

json to_json(const persistence::UserProfileRecord& r) {
  return {{"user_id", r.user_id},
          {"weights", weights_to_json(r.weights)},
          {"traffic_sensitive", r.traffic_sensitive},
          {"effective_weights", weights_to_json(scoring::normalize_weights(r.profile()))},
          {"declared_purpose", std::string(persistence::to_string(r.declared_purpose))},
          {"updated_at", to_iso8601(r.updated_at)}};
}

json to_json(const persistence::FavouriteRecord& r) {
  return {{"id", r.id}, {"user_id", r.user_id}, {"location_id", r.location_id}, {"saved_at", to_iso8601(r.saved_at)}};
}

json to_json(const StatsReport& s) {
  json districts = json::array();
  for (const auto& [name, share] : s.top_districts) districts.push_back({{"district", name}, {"share", share}});
  json order = json::array();
  for (auto c : s.amenity_preference_order) order.push_back(std::string(scoring::to_string(c)));
  json purposes = json::object();
  for (const auto& [p, f] : s.purpose_distribution) purposes[std::string(persistence::to_string(p))] = f;
  return {{"total_queries", s.total_queries},
          {"top_districts", districts},
          {"top_districts_share", s.top_districts_share},
          {"amenity_preference_order", order},
          {"purpose_distribution", purposes}};
}

EvaluateRequest evaluate_request_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidRequest, "request body must be a JSON object");
  EvaluateRequest r;
  try {
    if (j.contains("address")) r.address = j.at("address").get<std::string>();
    if (j.contains("point")) {
      const auto& p = j.at("point");
      r.point = GeoPoint{p.at("lat").get<double>(), p.at("lon").get<double>()};
    }
    if (j.contains("radius_m")) r.radius_m = j.at("radius_m").get<double>();
    if (j.contains("profile")) {
      const auto& p = j.at("profile");
      scoring::PreferenceProfile profile;
      if (p.contains("weights")) profile.weights = weights_from_json(p.at("weights"));
      profile.traffic_sensitive = p.value("traffic_sensitive", false);
      r.profile = profile;
    }
    if (j.contains("locale")) r.locale = j.at("locale").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidRequest, std::string("bad evaluate request: ") + e.what());
  }
  r.validate();
  return r;
}

ProfileUpdate profile_update_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidRequest, "profile body must be a JSON object");
  ProfileUpdate u;
  try {
    if (j.contains("weights")) u.weights = weights_from_json(j.at("weights"));
    u.traffic_sensitive = j.value("traffic_sensitive", false);
    if (j.contains("declared_purpose")) {
      const auto name = j.at("declared_purpose").get<std::string>();
      auto p = persistence::purpose_from_string(name);
      if (!p) fail(ErrorCode::InvalidRequest, "declared_purpose must be residence, investment or short_term");
      u.purpose = *p;
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidRequest, std::string("bad profile: ") + e.what());
  }
  for (double w : u.weights)
    if (!std::isfinite(w) || w <= 0.0) fail(ErrorCode::InvalidRequest, "weights must be positive");
  return u;
}

}  // namespace urbanscore::service
