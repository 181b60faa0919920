#include "urbanscore/geodata/wire.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "urbanscore/error.hpp"

namespace urbanscore::geodata::wire {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(std::string_view provider, std::string_view what) {
  fail(ErrorCode::MalformedResponse, fmt::format("{}: {}", provider, what));
}

// Nominatim encodes coordinates as strings; accept numbers too.
std::optional<double> number_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) {
    try {
      return std::stod(it->get<std::string>());
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

ResolvedAddress parse_place(const json& place, std::string_view provider, std::string source_query) {
  if (!place.is_object()) malformed(provider, "place is not an object");
  const auto lat = number_field(place, "lat");
  const auto lon = number_field(place, "lon");
  if (!lat || !lon) malformed(provider, "place without coordinates");
  ResolvedAddress out;
  out.point = GeoPoint{*lat, *lon};
  if (!out.point.valid()) malformed(provider, "coordinates out of range");
  out.display_name = place.value("display_name", std::string{});
  if (out.display_name.empty()) malformed(provider, "place without display_name");
  if (auto it = place.find("address"); it != place.end() && it->is_object()) {
    for (const auto& [k, v] : it->items()) {
      if (v.is_string()) out.hierarchy[k] = v.get<std::string>();
    }
  }
  out.source_query = std::move(source_query);
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

json parse_body(std::string_view body, std::string_view provider) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    malformed(provider, std::string("invalid JSON: ") + e.what());
  }
}

// --- geocoding -------------------------------------------------------------

HttpRequest forward_geocode_request(std::string_view base_url, std::string_view query) {
  HttpRequest r;
  r.base_url = base_url;
  r.path = "/search";
  r.query = {{"q", std::string(query)}, {"format", "jsonv2"}, {"addressdetails", "1"}, {"limit", "1"}};
  return r;
}

HttpRequest reverse_geocode_request(std::string_view base_url, const GeoPoint& point) {
  HttpRequest r;
  r.base_url = base_url;
  r.path = "/reverse";
  r.query = {{"lat", fmt::format("{:.6f}", point.lat)},
             {"lon", fmt::format("{:.6f}", point.lon)},
             {"format", "jsonv2"},
             {"addressdetails", "1"}};
  return r;
}

ResolvedAddress parse_forward_geocode(const json& body, std::string_view query) {
  if (!body.is_array()) malformed("geocode", "expected an array of places");
  if (body.empty()) fail(ErrorCode::NotFound, fmt::format("no place matches '{}'", query));
  return parse_place(body.front(), "geocode", std::string(query));
}

ResolvedAddress parse_reverse_geocode(const json& body, const GeoPoint& query_point) {
  if (body.is_object() && body.contains("error"))
    fail(ErrorCode::NotFound, fmt::format("no address near {}", query_point.to_string()));
  return parse_place(body, "geocode", query_point.to_string());
}

// --- facilities ------------------------------------------------------------

std::string overpass_query(const GeoPoint& center, double radius_m) {
  const std::string around = fmt::format("(around:{:.0f},{:.6f},{:.6f})", radius_m, center.lat, center.lon);
  return fmt::format(
      "[out:json][timeout:25];\n"
      "(\n"
      "  nwr[\"shop\"=\"supermarket\"]{0};\n"
      "  nwr[\"amenity\"~\"^(restaurant|fast_food|school|kindergarten)$\"]{0};\n"
      "  nwr[\"leisure\"=\"park\"]{0};\n"
      "  node[\"railway\"~\"^(subway_entrance|tram_stop)$\"]{0};\n"
      "  node[\"highway\"=\"bus_stop\"]{0};\n"
      "  node[\"public_transport\"=\"platform\"]{0};\n"
      ");\n"
      "out center tags;\n",
      around);
}

HttpRequest facilities_request(std::string_view base_url, const GeoPoint& center, double radius_m) {
  HttpRequest r;
  r.method = "POST";
  r.base_url = base_url;
  r.content_type = "application/x-www-form-urlencoded";
  r.body = "data=" + url_encode(overpass_query(center, radius_m));
  return r;
}

std::vector<Facility> parse_facilities(const json& body, const GeoPoint& center, double radius_m,
                                       const EducationRules& rules) {
  if (!body.is_object()) malformed("facilities", "expected an object");
  auto elements = body.find("elements");
  if (elements == body.end() || !elements->is_array()) malformed("facilities", "missing elements array");

  std::vector<Facility> out;
  for (const auto& el : *elements) {
    if (!el.is_object()) malformed("facilities", "element is not an object");
    auto tags_it = el.find("tags");
    if (tags_it == el.end() || !tags_it->is_object()) continue;

    Facility f;
    for (const auto& [k, v] : tags_it->items()) {
      if (v.is_string()) f.tags[k] = v.get<std::string>();
    }
    const auto category = categorize(f.tags, rules);
    if (!category) continue;
    f.category = *category;

    std::optional<double> lat = number_field(el, "lat");
    std::optional<double> lon = number_field(el, "lon");
    if ((!lat || !lon) && el.contains("center")) {
      lat = number_field(el["center"], "lat");
      lon = number_field(el["center"], "lon");
    }
    if (!lat || !lon) malformed("facilities", "element without coordinates");
    f.point = GeoPoint{*lat, *lon};
    if (!f.point.valid()) malformed("facilities", "coordinates out of range");

    if (auto n = f.tags.find("name"); n != f.tags.end()) f.name = n->second;
    if (is_transport_stop(f.category)) {
      if (auto r = f.tags.find("route_ref"); r != f.tags.end()) f.route_refs = parse_route_refs(r->second);
    }
    f.distance_m = great_circle_m(center, f.point);
    if (f.distance_m <= radius_m) out.push_back(std::move(f));
  }
  return out;
}

// --- traffic ---------------------------------------------------------------

HttpRequest traffic_request(std::string_view base_url, std::string_view api_key, const GeoPoint& point) {
  HttpRequest r;
  r.base_url = base_url;
  r.path = fmt::format("/traffic/services/4/flowSegmentData/absolute/{}/json", kTrafficZoom);
  r.query = {{"point", fmt::format("{:.6f},{:.6f}", point.lat, point.lon)}, {"unit", "KMPH"}};
  if (!api_key.empty()) r.query.emplace_back("key", std::string(api_key));
  return r;
}

TrafficSample parse_traffic(const json& body, const GeoPoint& point) {
  if (!body.is_object()) malformed("traffic", "expected an object");
  for (const char* key : {"detailedError", "error"}) {
    auto it = body.find(key);
    if (it == body.end()) continue;
    std::string message;
    if (it->is_object()) {
      message = it->value("message", it->value("description", std::string{}));
    } else if (it->is_string()) {
      message = it->get<std::string>();
    }
    if (lower(message).find("segment") != std::string::npos)
      fail(ErrorCode::NoSegment, fmt::format("no road segment near {}", point.to_string()));
    malformed("traffic", "provider error: " + message);
  }
  auto seg = body.find("flowSegmentData");
  if (seg == body.end() || !seg->is_object()) malformed("traffic", "missing flowSegmentData");

  auto field = [&](const char* key) {
    auto v = number_field(*seg, key);
    if (!v || !std::isfinite(*v)) malformed("traffic", std::string("missing ") + key);
    return *v;
  };
  TrafficSample s;
  s.point = point;
  s.current_speed = field("currentSpeed");
  s.free_flow_speed = field("freeFlowSpeed");
  s.current_travel_time = field("currentTravelTime");
  s.free_flow_travel_time = field("freeFlowTravelTime");
  s.confidence = field("confidence");
  if (!s.valid()) malformed("traffic", "sample values out of range");
  return s;
}

// --- air quality -----------------------------------------------------------

HttpRequest air_history_request(std::string_view base_url, std::string_view api_key,
                                const GeoPoint& point, Timestamp start, Timestamp end) {
  using std::chrono::duration_cast;
  using std::chrono::seconds;
  HttpRequest r;
  r.base_url = base_url;
  r.path = "/data/2.5/air_pollution/history";
  r.query = {{"lat", fmt::format("{:.6f}", point.lat)},
             {"lon", fmt::format("{:.6f}", point.lon)},
             {"start", std::to_string(duration_cast<seconds>(start.time_since_epoch()).count())},
             {"end", std::to_string(duration_cast<seconds>(end.time_since_epoch()).count())}};
  if (!api_key.empty()) r.query.emplace_back("appid", std::string(api_key));
  return r;
}

std::vector<PollutantSeries> parse_air_history(const json& body, int window_days) {
  if (!body.is_object()) malformed("air", "expected an object");
  auto list = body.find("list");
  if (list == body.end() || !list->is_array()) malformed("air", "missing list array");

  std::vector<PollutantSeries> series;
  for (auto p : kAllPollutants) series.push_back(PollutantSeries{p, {}, window_days});

  std::vector<const json*> entries;
  for (const auto& e : *list) {
    if (!e.is_object() || !e.contains("dt") || !e["dt"].is_number())
      malformed("air", "entry without dt");
    entries.push_back(&e);
  }
  std::stable_sort(entries.begin(), entries.end(), [](const json* a, const json* b) {
    return (*a)["dt"].get<long long>() < (*b)["dt"].get<long long>();
  });

  for (const json* e : entries) {
    const Timestamp at = from_micros((*e)["dt"].get<long long>() * 1'000'000LL);
    auto comps = e->find("components");
    if (comps == e->end() || !comps->is_object()) continue;
    for (auto& s : series) {
      auto v = number_field(*comps, std::string(to_string(s.pollutant)).c_str());
      if (!v) continue;
      if (!std::isfinite(*v) || *v < 0.0) malformed("air", "negative concentration");
      if (!s.readings.empty() && s.readings.back().at >= at) malformed("air", "duplicate timestamp");
      s.readings.push_back(Reading{at, *v});
    }
  }
  return series;
}

}  // namespace urbanscore::geodata::wire
