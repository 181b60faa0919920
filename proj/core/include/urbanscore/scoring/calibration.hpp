#pragma once

#include <map>
#include <optional>
#include <vector>

#include "urbanscore/geodata/types.hpp"
#include "urbanscore/scoring/scoring.hpp"

namespace urbanscore::scoring {

/// Facility-derived inputs of one reference location.
struct CalibrationInputs {
  std::map<FacilityCategory, int> lifestyle_counts;
  std::vector<geodata::SchoolDistance> schools;
  int distinct_routes = 0;
  std::optional<double> nearest_metro_m;

  static CalibrationInputs from_summary(const geodata::FacilitySummary& summary);
};

/// Reference sub-scores; absent targets do not constrain the fit.
struct CalibrationTargets {
  std::optional<double> lifestyle;
  std::optional<double> education;
  std::optional<double> surface;
  std::optional<double> metro;
};

struct CalibrationCase {
  CalibrationInputs inputs;
  CalibrationTargets targets;
};

struct CalibrationResult {
  CalibrationConstants constants;
  double squared_error = 0.0;
  /// Fitted lifestyle/education/surface/metro per case, in input order.
  std::vector<SubScores> fitted;
};

/// Grid search over the free constants (lifestyle count reference and mix,
/// education decay and type-weight scale, surface coefficient) minimising the
/// summed squared error against the targets. Metro thresholds are fixed.
/// Among equally good grid points the one closest to `start` wins.
CalibrationResult calibrate(const std::vector<CalibrationCase>& cases,
                            const CalibrationConstants& start = {});

}  // namespace urbanscore::scoring
