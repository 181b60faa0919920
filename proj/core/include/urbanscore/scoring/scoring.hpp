#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "urbanscore/geodata/types.hpp"

namespace urbanscore {
class Config;
}

namespace urbanscore::scoring {

using geodata::FacilityCategory;
using geodata::Pollutant;

enum class Component { Air, Traffic, Lifestyle, Education, Metro, Surface };
inline constexpr std::size_t kComponentCount = 6;
inline constexpr std::array<Component, kComponentCount> kAllComponents{
    Component::Air,       Component::Traffic, Component::Lifestyle,
    Component::Education, Component::Metro,   Component::Surface};

std::string_view to_string(Component c) noexcept;

/// The six component scores, each in [0, 100].
struct SubScores {
  double air = 0.0;
  double traffic = 0.0;
  double lifestyle = 0.0;
  double education = 0.0;
  double metro = 0.0;
  double surface = 0.0;

  double get(Component c) const noexcept;
  void set(Component c, double v) noexcept;
  std::array<double, kComponentCount> as_array() const noexcept;
  static SubScores from_array(const std::array<double, kComponentCount>& a) noexcept;
  bool valid() const noexcept;
};

using WeightVector = std::array<double, kComponentCount>;

inline constexpr WeightVector kDefaultWeights{0.20, 0.20, 0.20, 0.20, 0.10, 0.10};
inline constexpr double kMinWeight = 0.05;
inline constexpr double kMaxWeight = 0.40;
inline constexpr double kTrafficSensitivityFactor = 1.5;

struct PreferenceProfile {
  WeightVector weights = kDefaultWeights;
  bool traffic_sensitive = false;
};

struct PollutantParams {
  double weight;
  double threshold;  // µg/m³
};

/// Health-impact weights and guideline thresholds per pollutant.
///
/// Thresholds default to the WHO 2021 24-hour guideline values (O3 uses the
/// 8-hour peak-season value, CO is 4 mg/m³). NH3 has no WHO guideline and
/// defaults to 100 µg/m³.
struct PollutantModel {
  std::map<Pollutant, PollutantParams> params;

  static PollutantModel defaults();
  void validate() const;
};

struct CalibrationConstants {
  double lifestyle_count_ref = 60.0;
  double lifestyle_w_count = 0.6;
  double lifestyle_w_entropy = 0.4;
  std::map<FacilityCategory, double> education_type_weights{
      {FacilityCategory::Kindergarten, 0.25},
      {FacilityCategory::PrimarySchool, 0.40},
      {FacilityCategory::HighSchool, 0.60}};
  double education_decay_m = 1000.0;
  double metro_full_m = 200.0;
  double metro_zero_m = 1000.0;
  double surface_k = 26.5;
  int surface_ref_routes = 8;

  void validate() const;
};

PollutantModel pollutant_model_from(const Config& cfg);
CalibrationConstants calibration_from(const Config& cfg);
/// Writes every calibration key back into `cfg`.
void store_calibration(Config& cfg, const CalibrationConstants& cal);

// --- sub-scores ------------------------------------------------------------

/// Weighted air index over pollutants that have a mean. Each term is
/// clamp(100 - 100 * conc / threshold, 0, 100); the sum is normalised by the
/// weights of the pollutants actually present. Throws NoData when none are.
double air_score(const std::map<Pollutant, double>& means,
                 const PollutantModel& model = PollutantModel::defaults());

/// Mean of the speed and travel-time ratios, multiplied by confidence,
/// clamped to [0, 1] and scaled to 100.
double traffic_point_score(const geodata::TrafficSample& sample);

/// Unweighted mean of point scores over present samples; NoData if none.
double traffic_score(std::span<const std::optional<geodata::TrafficSample>> samples);

/// Shannon entropy in nats over strictly positive counts.
double shannon_entropy(std::span<const long long> counts);

template <class Key>
double shannon_entropy(const std::map<Key, int>& counts) {
  std::vector<long long> v;
  v.reserve(counts.size());
  for (const auto& [_, n] : counts) v.push_back(n);
  return shannon_entropy(std::span<const long long>(v));
}

double lifestyle_score(const std::map<FacilityCategory, int>& lifestyle_counts,
                       const CalibrationConstants& cal = {});

double education_score(std::span<const geodata::SchoolDistance> schools,
                       const CalibrationConstants& cal = {});

/// Piecewise linear: 100 up to metro_full_m, 0 from metro_zero_m or when absent.
double metro_score(std::optional<double> nearest_metro_m, const CalibrationConstants& cal = {});

double surface_score(int distinct_routes, const CalibrationConstants& cal = {});

// --- aggregation -----------------------------------------------------------

/// Applies the traffic-sensitivity factor, scales to sum 1 and clamps every
/// component into [0.05, 0.40], redistributing proportionally across the
/// unclamped components until stable.
WeightVector normalize_weights(const PreferenceProfile& profile);

/// Unrounded dot product.
double weighted_total(const SubScores& sub, const WeightVector& weights) noexcept;

/// Round-half-up of the dot product, in [0, 100].
int aggregate(const SubScores& sub, const WeightVector& weights);

}  // namespace urbanscore::scoring
