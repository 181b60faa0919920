#include "urbanscore/geodata/codec.hpp"

#include "urbanscore/error.hpp"

namespace urbanscore {

void to_json(nlohmann::json& j, const GeoPoint& p) { j = {{"lat", p.lat}, {"lon", p.lon}}; }

void from_json(const nlohmann::json& j, GeoPoint& p) {
  p = GeoPoint::make(j.at("lat").get<double>(), j.at("lon").get<double>());
}

}  // namespace urbanscore

namespace urbanscore::geodata {

using nlohmann::json;

void to_json(json& j, const ResolvedAddress& a) {
  j = {{"point", a.point},
       {"display_name", a.display_name},
       {"hierarchy", a.hierarchy},
       {"source_query", a.source_query}};
}

void from_json(const json& j, ResolvedAddress& a) {
  a.point = j.at("point").get<GeoPoint>();
  a.display_name = j.at("display_name").get<std::string>();
  a.hierarchy = j.value("hierarchy", std::map<std::string, std::string>{});
  a.source_query = j.value("source_query", std::string{});
}

void to_json(json& j, const Facility& f) {
  j = {{"category", to_string(f.category)},
       {"name", f.name},
       {"point", f.point},
       {"tags", f.tags},
       {"route_refs", f.route_refs},
       {"distance_m", f.distance_m}};
}

void from_json(const json& j, Facility& f) {
  auto c = facility_category_from_string(j.at("category").get<std::string>());
  if (!c) fail(ErrorCode::MalformedResponse, "unknown facility category");
  f.category = *c;
  f.name = j.value("name", std::string{});
  f.point = j.at("point").get<GeoPoint>();
  f.tags = j.value("tags", std::map<std::string, std::string>{});
  f.route_refs = j.value("route_refs", std::set<std::string>{});
  f.distance_m = j.value("distance_m", 0.0);
}

void to_json(json& j, const TrafficSample& s) {
  j = {{"point", s.point},
       {"current_speed", s.current_speed},
       {"free_flow_speed", s.free_flow_speed},
       {"current_travel_time", s.current_travel_time},
       {"free_flow_travel_time", s.free_flow_travel_time},
       {"confidence", s.confidence}};
}

void from_json(const json& j, TrafficSample& s) {
  s.point = j.at("point").get<GeoPoint>();
  s.current_speed = j.at("current_speed").get<double>();
  s.free_flow_speed = j.at("free_flow_speed").get<double>();
  s.current_travel_time = j.at("current_travel_time").get<double>();
  s.free_flow_travel_time = j.at("free_flow_travel_time").get<double>();
  s.confidence = j.at("confidence").get<double>();
}

// Readings are stored as parallel arrays to keep 90-day series compact.
void to_json(json& j, const PollutantSeries& s) {
  std::vector<std::int64_t> at;
  std::vector<double> conc;
  at.reserve(s.readings.size());
  conc.reserve(s.readings.size());
  for (const auto& r : s.readings) {
    at.push_back(to_micros(r.at) / 1'000'000);
    conc.push_back(r.concentration);
  }
  j = {{"pollutant", to_string(s.pollutant)}, {"window_days", s.window_days}, {"t", at}, {"c", conc}};
}

void from_json(const json& j, PollutantSeries& s) {
  auto p = pollutant_from_string(j.at("pollutant").get<std::string>());
  if (!p) fail(ErrorCode::MalformedResponse, "unknown pollutant");
  s.pollutant = *p;
  s.window_days = j.value("window_days", 90);
  const auto at = j.at("t").get<std::vector<std::int64_t>>();
  const auto conc = j.at("c").get<std::vector<double>>();
  if (at.size() != conc.size()) fail(ErrorCode::MalformedResponse, "series length mismatch");
  s.readings.clear();
  for (std::size_t i = 0; i < at.size(); ++i)
    s.readings.push_back(Reading{from_micros(at[i] * 1'000'000), conc[i]});
}

void to_json(json& j, const FacilitySummary& s) {
  json counts = json::object();
  for (const auto& [c, n] : s.counts) counts[std::string(to_string(c))] = n;
  json schools = json::array();
  for (const auto& sd : s.schools)
    schools.push_back({{"category", to_string(sd.category)}, {"distance_m", sd.distance_m}});
  j = {{"counts", counts},
       {"entropy_nats", s.entropy_nats},
       {"routes", s.routes},
       {"nearest_metro_m", s.nearest_metro_m ? json(*s.nearest_metro_m) : json(nullptr)},
       {"schools", schools}};
}

}  // namespace urbanscore::geodata
