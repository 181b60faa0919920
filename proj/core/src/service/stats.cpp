#include "urbanscore/service/stats.hpp"

#include <algorithm>

#include "urbanscore/error.hpp"

namespace urbanscore::service {

StatsReport compute_stats(persistence::Store& store, Timestamp since, Timestamp until) {
  require(since <= until, "since must not be after until");
  StatsReport report;

  const auto scores = store.scores_between(since, until);
  report.total_queries = scores.size();
  if (!scores.empty()) {
    std::map<persistence::Id, std::string> district_by_location;
    for (const auto& loc : store.list_locations()) district_by_location[loc.id] = loc.district;
    std::map<std::string, std::size_t> counts;
    for (const auto& s : scores) {
      auto it = district_by_location.find(s.location_id);
      if (it != district_by_location.end() && !it->second.empty()) ++counts[it->second];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > kTopDistricts) ranked.resize(kTopDistricts);
    std::size_t listed = 0;
    for (const auto& [district, n] : ranked) {
      report.top_districts.emplace_back(district, static_cast<double>(n) / static_cast<double>(scores.size()));
      listed += n;
    }
    report.top_districts_share = static_cast<double>(listed) / static_cast<double>(scores.size());
  }

  const auto profiles = store.list_profiles();
  if (!profiles.empty()) {
    std::array<double, scoring::kComponentCount> mean{};
    std::map<persistence::Purpose, std::size_t> purposes;
    for (const auto& p : profiles) {
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += p.weights[i];
      ++purposes[p.declared_purpose];
    }
    std::vector<scoring::Component> order(scoring::kAllComponents.begin(), scoring::kAllComponents.end());
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return mean[static_cast<std::size_t>(a)] > mean[static_cast<std::size_t>(b)];
    });
    report.amenity_preference_order = order;
    for (const auto& [purpose, n] : purposes)
      report.purpose_distribution[purpose] = static_cast<double>(n) / static_cast<double>(profiles.size());
  }
  return report;
}

}  // namespace urbanscore::service
