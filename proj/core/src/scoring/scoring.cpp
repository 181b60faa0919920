#include "urbanscore/scoring/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"

namespace urbanscore::scoring {

namespace {

double clamp100(double v) { return std::clamp(v, 0.0, 100.0); }

const std::map<FacilityCategory, std::string_view> kEducationKeys{
    {FacilityCategory::Kindergarten, "kindergarten"},
    {FacilityCategory::PrimarySchool, "primary"},
    {FacilityCategory::HighSchool, "high"}};

}  // namespace

std::string_view to_string(Component c) noexcept {
  switch (c) {
    case Component::Air: return "air";
    case Component::Traffic: return "traffic";
    case Component::Lifestyle: return "lifestyle";
    case Component::Education: return "education";
    case Component::Metro: return "metro";
    case Component::Surface: return "surface";
  }
  return "unknown";
}

double SubScores::get(Component c) const noexcept {
  switch (c) {
    case Component::Air: return air;
    case Component::Traffic: return traffic;
    case Component::Lifestyle: return lifestyle;
    case Component::Education: return education;
    case Component::Metro: return metro;
    case Component::Surface: return surface;
  }
  return 0.0;
}

void SubScores::set(Component c, double v) noexcept {
  switch (c) {
    case Component::Air: air = v; break;
    case Component::Traffic: traffic = v; break;
    case Component::Lifestyle: lifestyle = v; break;
    case Component::Education: education = v; break;
    case Component::Metro: metro = v; break;
    case Component::Surface: surface = v; break;
  }
}

std::array<double, kComponentCount> SubScores::as_array() const noexcept {
  return {air, traffic, lifestyle, education, metro, surface};
}

SubScores SubScores::from_array(const std::array<double, kComponentCount>& a) noexcept {
  return SubScores{a[0], a[1], a[2], a[3], a[4], a[5]};
}

bool SubScores::valid() const noexcept {
  return std::all_of(kAllComponents.begin(), kAllComponents.end(), [this](Component c) {
    const double v = get(c);
    return std::isfinite(v) && v >= 0.0 && v <= 100.0;
  });
}

PollutantModel PollutantModel::defaults() {
  return PollutantModel{{
      {Pollutant::PM25, {0.30, 15.0}},
      {Pollutant::PM10, {0.20, 45.0}},
      {Pollutant::CO, {0.05, 4000.0}},
      {Pollutant::NO2, {0.05, 25.0}},
      {Pollutant::O3, {0.05, 100.0}},
      {Pollutant::NH3, {0.05, 100.0}},
  }};
}

void PollutantModel::validate() const {
  require(!params.empty(), "pollutant model is empty");
  for (const auto& [p, v] : params) {
    require(std::isfinite(v.weight) && v.weight > 0.0,
            fmt::format("pollutant weight for {} must be positive", geodata::to_string(p)));
    require(std::isfinite(v.threshold) && v.threshold > 0.0,
            fmt::format("pollutant threshold for {} must be positive", geodata::to_string(p)));
  }
}

void CalibrationConstants::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(positive(lifestyle_count_ref), "lifestyle_count_ref must be positive");
  require(positive(lifestyle_w_count) && positive(lifestyle_w_entropy),
          "lifestyle mix weights must be positive");
  require(std::abs(lifestyle_w_count + lifestyle_w_entropy - 1.0) < 1e-9,
          "lifestyle mix weights must sum to 1");
  for (const auto& [c, w] : education_type_weights)
    require(positive(w), "education type weights must be positive");
  require(positive(education_decay_m), "education_decay_m must be positive");
  require(positive(metro_full_m) && positive(metro_zero_m) && metro_full_m < metro_zero_m,
          "metro_full_m must be positive and below metro_zero_m");
  require(positive(surface_k), "surface_k must be positive");
  require(surface_ref_routes > 0, "surface_ref_routes must be positive");
}

PollutantModel pollutant_model_from(const Config& cfg) {
  PollutantModel model = PollutantModel::defaults();
  for (auto& [p, v] : model.params) {
    const std::string name(geodata::to_string(p) == "pm2_5" ? "pm25" : geodata::to_string(p));
    v.weight = cfg.get_double("scoring.air.weight." + name, v.weight);
    v.threshold = cfg.get_double("scoring.air.threshold." + name, v.threshold);
  }
  model.validate();
  return model;
}

CalibrationConstants calibration_from(const Config& cfg) {
  CalibrationConstants cal;
  cal.lifestyle_count_ref = cfg.get_double("scoring.lifestyle_count_ref", cal.lifestyle_count_ref);
  cal.lifestyle_w_count = cfg.get_double("scoring.lifestyle_w_count", cal.lifestyle_w_count);
  cal.lifestyle_w_entropy = cfg.get_double("scoring.lifestyle_w_entropy", cal.lifestyle_w_entropy);
  for (auto& [c, w] : cal.education_type_weights)
    w = cfg.get_double(fmt::format("scoring.education.weight.{}", kEducationKeys.at(c)), w);
  cal.education_decay_m = cfg.get_double("scoring.education_decay_m", cal.education_decay_m);
  cal.metro_full_m = cfg.get_double("scoring.metro_full_m", cal.metro_full_m);
  cal.metro_zero_m = cfg.get_double("scoring.metro_zero_m", cal.metro_zero_m);
  cal.surface_k = cfg.get_double("scoring.surface_k", cal.surface_k);
  cal.surface_ref_routes =
      static_cast<int>(cfg.get_int("scoring.surface_ref_routes", cal.surface_ref_routes));
  cal.validate();
  return cal;
}

void store_calibration(Config& cfg, const CalibrationConstants& cal) {
  auto num = [](double v) { return fmt::format("{:.10g}", v); };
  cfg.set("scoring.lifestyle_count_ref", num(cal.lifestyle_count_ref));
  cfg.set("scoring.lifestyle_w_count", num(cal.lifestyle_w_count));
  cfg.set("scoring.lifestyle_w_entropy", num(cal.lifestyle_w_entropy));
  for (const auto& [c, w] : cal.education_type_weights)
    cfg.set(fmt::format("scoring.education.weight.{}", kEducationKeys.at(c)), num(w));
  cfg.set("scoring.education_decay_m", num(cal.education_decay_m));
  cfg.set("scoring.metro_full_m", num(cal.metro_full_m));
  cfg.set("scoring.metro_zero_m", num(cal.metro_zero_m));
  cfg.set("scoring.surface_k", num(cal.surface_k));
  cfg.set("scoring.surface_ref_routes", std::to_string(cal.surface_ref_routes));
}

// --- sub-scores ------------------------------------------------------------

double air_score(const std::map<Pollutant, double>& means, const PollutantModel& model) {
  double weighted = 0.0;
  double weight_total = 0.0;
  for (const auto& [pollutant, p] : model.params) {
    auto it = means.find(pollutant);
    if (it == means.end()) continue;
    const double conc = it->second;
    require(std::isfinite(conc) && conc >= 0.0,
            fmt::format("negative mean for {}", geodata::to_string(pollutant)));
    weighted += p.weight * clamp100(100.0 - conc / p.threshold * 100.0);
    weight_total += p.weight;
  }
  if (weight_total <= 0.0) fail(ErrorCode::NoData, "no pollutant means available");
  return clamp100(weighted / weight_total);
}

double traffic_point_score(const geodata::TrafficSample& s) {
  if (!(s.free_flow_speed > 0.0) || !(s.current_travel_time > 0.0) ||
      !std::isfinite(s.current_speed) || !std::isfinite(s.free_flow_travel_time)) {
    fail(ErrorCode::InvalidSample, "traffic sample has a non-positive denominator");
  }
  const double speed_ratio = s.current_speed / s.free_flow_speed;
  const double time_ratio = s.free_flow_travel_time / s.current_travel_time;
  const double raw = (speed_ratio + time_ratio) / 2.0;
  const double penalised = raw * std::clamp(s.confidence, 0.0, 1.0);
  return std::clamp(penalised, 0.0, 1.0) * 100.0;
}

double traffic_score(std::span<const std::optional<geodata::TrafficSample>> samples) {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : samples) {
    if (!s) continue;
    sum += traffic_point_score(*s);
    ++n;
  }
  if (n == 0) fail(ErrorCode::NoData, "no valid traffic samples");
  return clamp100(sum / n);
}

double shannon_entropy(std::span<const long long> counts) {
  long long total = 0;
  for (auto c : counts) {
    require(c >= 0, "negative category count");
    total += c;
  }
  if (total == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

double lifestyle_score(const std::map<FacilityCategory, int>& counts,
                       const CalibrationConstants& cal) {
  long long total = 0;
  for (const auto& [_, n] : counts) {
    require(n >= 0, "negative amenity count");
    total += n;
  }
  if (total == 0) return 0.0;
  const double count_term =
      std::log1p(static_cast<double>(total)) / std::log1p(cal.lifestyle_count_ref);
  const double entropy_term = shannon_entropy(counts) / std::log(4.0);
  return clamp100(100.0 * (cal.lifestyle_w_count * count_term + cal.lifestyle_w_entropy * entropy_term));
}

double education_score(std::span<const geodata::SchoolDistance> schools,
                       const CalibrationConstants& cal) {
  double exposure = 0.0;
  for (const auto& s : schools) {
    require(std::isfinite(s.distance_m) && s.distance_m >= 0.0, "negative school distance");
    auto it = cal.education_type_weights.find(s.category);
    if (it == cal.education_type_weights.end()) continue;
    exposure += it->second * std::max(0.0, 1.0 - s.distance_m / cal.education_decay_m);
  }
  return clamp100(100.0 * (1.0 - std::exp(-exposure)));
}

double metro_score(std::optional<double> nearest_metro_m, const CalibrationConstants& cal) {
  if (!nearest_metro_m) return 0.0;
  const double d = *nearest_metro_m;
  require(std::isfinite(d) && d >= 0.0, "negative metro distance");
  if (d <= cal.metro_full_m) return 100.0;
  if (d >= cal.metro_zero_m) return 0.0;
  return 100.0 * (cal.metro_zero_m - d) / (cal.metro_zero_m - cal.metro_full_m);
}

double surface_score(int distinct_routes, const CalibrationConstants& cal) {
  require(distinct_routes >= 0, "negative route count");
  return clamp100(cal.surface_k * std::sqrt(static_cast<double>(distinct_routes)));
}

// --- aggregation -----------------------------------------------------------

static_assert(kComponentCount * kMinWeight <= 1.0 && kComponentCount * kMaxWeight >= 1.0);

WeightVector normalize_weights(const PreferenceProfile& profile) {
  WeightVector v = profile.weights;
  for (double w : v) require(std::isfinite(w) && w > 0.0, "raw weights must be positive");

  const auto traffic = static_cast<std::size_t>(Component::Traffic);
  if (profile.traffic_sensitive) v[traffic] *= kTrafficSensitivityFactor;

  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& w : v) w /= total;

  // The result is clamp(s * v_i, lo, hi) for the unique scale s that makes it
  // sum to one: clamped components are pinned and the rest share the remainder
  // in proportion to their raw weights. The sum is a nondecreasing piecewise
  // linear function of s with kinks at lo/v_i and hi/v_i, so locate the
  // segment containing the crossing and solve it exactly.
  auto clamped_sum = [&](double s) {
    double sum = 0.0;
    for (double w : v) sum += std::clamp(s * w, kMinWeight, kMaxWeight);
    return sum;
  };

  double scale = 1.0;
  if (std::abs(clamped_sum(1.0) - 1.0) > 1e-15) {
    std::vector<double> kinks;
    for (double w : v) {
      kinks.push_back(kMinWeight / w);
      kinks.push_back(kMaxWeight / w);
    }
    std::sort(kinks.begin(), kinks.end());
    double lo = kinks.front();
    for (double hi : kinks) {
      if (clamped_sum(hi) < 1.0) {
        lo = hi;
        continue;
      }
      // Linear on [lo, hi]: pinned mass plus s times the free raw mass.
      const double mid = 0.5 * (lo + hi);
      double pinned = 0.0;
      double free_mass = 0.0;
      for (double w : v) {
        const double x = mid * w;
        if (x <= kMinWeight) {
          pinned += kMinWeight;
        } else if (x >= kMaxWeight) {
          pinned += kMaxWeight;
        } else {
          free_mass += w;
        }
      }
      scale = free_mass > 0.0 ? (1.0 - pinned) / free_mass : lo;
      scale = std::clamp(scale, lo, hi);
      break;
    }
  }

  WeightVector out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(scale * v[i], kMinWeight, kMaxWeight);

  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9)
    fail(ErrorCode::InfeasibleProfile, fmt::format("weights cannot be normalised (sum {})", sum));
  return out;
}

double weighted_total(const SubScores& sub, const WeightVector& weights) noexcept {
  const auto s = sub.as_array();
  double total = 0.0;
  for (std::size_t i = 0; i < kComponentCount; ++i) total += weights[i] * s[i];
  return total;
}

int aggregate(const SubScores& sub, const WeightVector& weights) {
  require(sub.valid(), "sub-scores must lie in [0, 100]");
  double sum = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, "weights must be non-negative");
    sum += w;
  }
  require(std::abs(sum - 1.0) < 1e-6, "weights must sum to 1");
  const double total = std::clamp(weighted_total(sub, weights), 0.0, 100.0);
  // Half-up; the slack absorbs summation error so an exact .5 is not lost.
  return static_cast<int>(std::floor(total + 0.5 + 1e-9));
}

}  // namespace urbanscore::scoring
