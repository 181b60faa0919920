#include "urbanscore/geodata/types.hpp"

#include <cmath>

namespace urbanscore::geodata {

std::string_view to_string(FacilityCategory c) noexcept {
  switch (c) {
    case FacilityCategory::Supermarket: return "supermarket";
    case FacilityCategory::Restaurant: return "restaurant";
    case FacilityCategory::FastFood: return "fast_food";
    case FacilityCategory::Park: return "park";
    case FacilityCategory::Kindergarten: return "kindergarten";
    case FacilityCategory::PrimarySchool: return "primary_school";
    case FacilityCategory::HighSchool: return "high_school";
    case FacilityCategory::MetroEntrance: return "metro_entrance";
    case FacilityCategory::BusStop: return "bus_stop";
    case FacilityCategory::TramStop: return "tram_stop";
  }
  return "unknown";
}

std::optional<FacilityCategory> facility_category_from_string(std::string_view s) noexcept {
  for (auto c : kAllFacilityCategories) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

bool is_transport_stop(FacilityCategory c) noexcept {
  return c == FacilityCategory::BusStop || c == FacilityCategory::TramStop;
}

bool is_school(FacilityCategory c) noexcept {
  return c == FacilityCategory::Kindergarten || c == FacilityCategory::PrimarySchool ||
         c == FacilityCategory::HighSchool;
}

int FacilitySummary::count(FacilityCategory c) const {
  auto it = counts.find(c);
  return it == counts.end() ? 0 : it->second;
}

std::map<FacilityCategory, int> FacilitySummary::lifestyle_counts() const {
  std::map<FacilityCategory, int> out;
  for (auto c : kLifestyleCategories) out[c] = count(c);
  return out;
}

bool TrafficSample::valid() const noexcept {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  return point.valid() && pos(current_speed) && pos(free_flow_speed) &&
         pos(current_travel_time) && pos(free_flow_travel_time) && std::isfinite(confidence) &&
         confidence >= 0.0 && confidence <= 1.0;
}

std::string_view to_string(Pollutant p) noexcept {
  switch (p) {
    case Pollutant::PM25: return "pm2_5";
    case Pollutant::PM10: return "pm10";
    case Pollutant::CO: return "co";
    case Pollutant::NO2: return "no2";
    case Pollutant::O3: return "o3";
    case Pollutant::NH3: return "nh3";
  }
  return "unknown";
}

std::optional<Pollutant> pollutant_from_string(std::string_view s) noexcept {
  for (auto p : kAllPollutants) {
    if (to_string(p) == s) return p;
  }
  if (s == "pm25") return Pollutant::PM25;
  return std::nullopt;
}

std::optional<double> PollutantSeries::mean() const {
  if (readings.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& r : readings) sum += r.concentration;
  return sum / static_cast<double>(readings.size());
}

std::map<Pollutant, double> mean_concentrations(const std::vector<PollutantSeries>& series) {
  std::map<Pollutant, double> out;
  for (const auto& s : series) {
    if (auto m = s.mean()) out[s.pollutant] = *m;
  }
  return out;
}

}  // namespace urbanscore::geodata
