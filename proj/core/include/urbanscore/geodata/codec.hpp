#pragma once

// JSON mapping of the geodata value types, used for the shared cache and the
// HTTP API.

#include <nlohmann/json.hpp>

#include "urbanscore/geo.hpp"
#include "urbanscore/geodata/types.hpp"

namespace urbanscore {
void to_json(nlohmann::json& j, const GeoPoint& p);
void from_json(const nlohmann::json& j, GeoPoint& p);
}  // namespace urbanscore

namespace urbanscore::geodata {

void to_json(nlohmann::json& j, const ResolvedAddress& a);
void from_json(const nlohmann::json& j, ResolvedAddress& a);

void to_json(nlohmann::json& j, const Facility& f);
void from_json(const nlohmann::json& j, Facility& f);

void to_json(nlohmann::json& j, const TrafficSample& s);
void from_json(const nlohmann::json& j, TrafficSample& s);

void to_json(nlohmann::json& j, const PollutantSeries& s);
void from_json(const nlohmann::json& j, PollutantSeries& s);

void to_json(nlohmann::json& j, const FacilitySummary& s);

}  // namespace urbanscore::geodata
