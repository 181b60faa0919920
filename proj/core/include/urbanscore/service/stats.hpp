#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "urbanscore/clock.hpp"
#include "urbanscore/persistence/store.hpp"

namespace urbanscore::service {

inline constexpr std::size_t kTopDistricts = 10;

struct StatsReport {
  std::size_t total_queries = 0;
  /// Up to ten districts by query count, each with its share of all queries
  /// in the window. Queries with no known district count in the total only.
  std::vector<std::pair<std::string, double>> top_districts;
  /// Sum of the listed shares.
  double top_districts_share = 0.0;
  /// Components ordered by mean stored profile weight, highest first.
  std::vector<scoring::Component> amenity_preference_order;
  /// Fraction of stored profiles per declared purpose.
  std::map<persistence::Purpose, double> purpose_distribution;
};

/// Queries are the scores persisted in [since, until).
StatsReport compute_stats(persistence::Store& store, Timestamp since, Timestamp until);

}  // namespace urbanscore::service
