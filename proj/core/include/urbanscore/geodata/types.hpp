#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "urbanscore/clock.hpp"
#include "urbanscore/geo.hpp"

namespace urbanscore::geodata {

struct ResolvedAddress {
  GeoPoint point;
  std::string display_name;
  /// Address components keyed by provider name (house_number, road, suburb,
  /// city, postcode, country, ...). May be partially populated.
  std::map<std::string, std::string> hierarchy;
  std::string source_query;
};

enum class FacilityCategory {
  Supermarket,
  Restaurant,
  FastFood,
  Park,
  Kindergarten,
  PrimarySchool,
  HighSchool,
  MetroEntrance,
  BusStop,
  TramStop,
};

inline constexpr std::size_t kFacilityCategoryCount = 10;
inline constexpr std::array<FacilityCategory, kFacilityCategoryCount> kAllFacilityCategories{
    FacilityCategory::Supermarket,   FacilityCategory::Restaurant,   FacilityCategory::FastFood,
    FacilityCategory::Park,          FacilityCategory::Kindergarten, FacilityCategory::PrimarySchool,
    FacilityCategory::HighSchool,    FacilityCategory::MetroEntrance, FacilityCategory::BusStop,
    FacilityCategory::TramStop,
};
inline constexpr std::array<FacilityCategory, 4> kLifestyleCategories{
    FacilityCategory::Supermarket, FacilityCategory::Restaurant, FacilityCategory::FastFood,
    FacilityCategory::Park};

std::string_view to_string(FacilityCategory c) noexcept;
std::optional<FacilityCategory> facility_category_from_string(std::string_view s) noexcept;

bool is_transport_stop(FacilityCategory c) noexcept;
bool is_school(FacilityCategory c) noexcept;

struct Facility {
  FacilityCategory category = FacilityCategory::Park;
  std::string name;
  GeoPoint point;
  std::map<std::string, std::string> tags;
  std::set<std::string> route_refs;  // BusStop / TramStop only
  double distance_m = 0.0;
};

struct SchoolDistance {
  FacilityCategory category;
  double distance_m;
};

struct FacilitySummary {
  std::map<FacilityCategory, int> counts;  // every category present, possibly 0
  double entropy_nats = 0.0;               // over lifestyle categories
  std::set<std::string> routes;            // lexicographic
  std::optional<double> nearest_metro_m;
  std::vector<SchoolDistance> schools;

  int count(FacilityCategory c) const;
  std::map<FacilityCategory, int> lifestyle_counts() const;
};

struct TrafficSample {
  GeoPoint point;
  double current_speed = 0.0;          // km/h
  double free_flow_speed = 0.0;        // km/h
  double current_travel_time = 0.0;    // s
  double free_flow_travel_time = 0.0;  // s
  double confidence = 0.0;             // [0, 1]

  bool valid() const noexcept;
};

enum class Pollutant { PM25, PM10, CO, NO2, O3, NH3 };

inline constexpr std::array<Pollutant, 6> kAllPollutants{
    Pollutant::PM25, Pollutant::PM10, Pollutant::CO, Pollutant::NO2, Pollutant::O3, Pollutant::NH3};

std::string_view to_string(Pollutant p) noexcept;
std::optional<Pollutant> pollutant_from_string(std::string_view s) noexcept;

struct Reading {
  Timestamp at;
  double concentration;  // µg/m³
};

struct PollutantSeries {
  Pollutant pollutant = Pollutant::PM25;
  std::vector<Reading> readings;  // strictly increasing timestamps
  int window_days = 90;

  std::optional<double> mean() const;
};

/// Mean concentration per pollutant over present readings; pollutants with no
/// readings are absent from the map.
std::map<Pollutant, double> mean_concentrations(const std::vector<PollutantSeries>& series);

}  // namespace urbanscore::geodata
