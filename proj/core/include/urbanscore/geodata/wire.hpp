#pragma once

// Request builders and response parsers for the four external feeds. Parsers
// read only the fields the domain types need and ignore everything else.

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

#include "urbanscore/clock.hpp"
#include "urbanscore/geodata/facilities.hpp"
#include "urbanscore/geodata/transport.hpp"
#include "urbanscore/geodata/types.hpp"

namespace urbanscore::geodata::wire {

/// Parses a body as JSON; MalformedResponse on syntax errors.
nlohmann::json parse_body(std::string_view body, std::string_view provider);

// --- geocoding (Nominatim jsonv2) -------------------------------------------

HttpRequest forward_geocode_request(std::string_view base_url, std::string_view query);
HttpRequest reverse_geocode_request(std::string_view base_url, const GeoPoint& point);
/// Array of places; the first is taken. NotFound when empty.
ResolvedAddress parse_forward_geocode(const nlohmann::json& body, std::string_view query);
/// Single place object; NotFound on {"error": ...}.
ResolvedAddress parse_reverse_geocode(const nlohmann::json& body, const GeoPoint& query_point);

// --- facilities (Overpass QL) -----------------------------------------------

/// One batched statement covering every facility category within the radius.
std::string overpass_query(const GeoPoint& center, double radius_m);
HttpRequest facilities_request(std::string_view base_url, const GeoPoint& center, double radius_m);
/// Categorises elements (nodes by lat/lon, ways/relations by center), computes
/// distance_m and keeps only elements within `radius_m` of the center.
std::vector<Facility> parse_facilities(const nlohmann::json& body, const GeoPoint& center,
                                       double radius_m, const EducationRules& rules = {});

// --- traffic (TomTom flow segment data) --------------------------------------

inline constexpr int kTrafficZoom = 10;

HttpRequest traffic_request(std::string_view base_url, std::string_view api_key,
                            const GeoPoint& point);
/// NoSegment when the provider reports no road near the point.
TrafficSample parse_traffic(const nlohmann::json& body, const GeoPoint& point);

// --- air quality (OpenWeatherMap air pollution history) ----------------------

HttpRequest air_history_request(std::string_view base_url, std::string_view api_key,
                                const GeoPoint& point, Timestamp start, Timestamp end);
/// Six hourly series; entries lacking a component leave a gap in that series.
std::vector<PollutantSeries> parse_air_history(const nlohmann::json& body, int window_days);

}  // namespace urbanscore::geodata::wire
