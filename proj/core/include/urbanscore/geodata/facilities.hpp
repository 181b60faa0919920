#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urbanscore/geodata/types.hpp"

namespace urbanscore::geodata {

inline constexpr double kMinRadiusM = 100.0;
inline constexpr double kMaxRadiusM = 5000.0;
inline constexpr double kDefaultRadiusM = 800.0;
inline constexpr double kTrafficOffsetM = 550.0;

/// Keywords (matched case- and diacritic-insensitively against name/operator)
/// that mark a school as secondary education.
struct EducationRules {
  std::vector<std::string> highschool_keywords{"liceu", "liceul", "colegiul",
                                               "colegiu national"};
};

/// Lowercases ASCII and folds Romanian diacritics (ă â î ș ş ț ţ) to ASCII.
std::string fold_text(std::string_view text);

/// Maps raw source tags to a category; nullopt for elements of no interest.
/// Schools are resolved through classify_education.
std::optional<FacilityCategory> categorize(const std::map<std::string, std::string>& tags,
                                           const EducationRules& rules = {});

bool is_school_like(const std::map<std::string, std::string>& tags) noexcept;

/// Kindergarten / PrimarySchool / HighSchool for a school-like facility.
FacilityCategory classify_education(const Facility& facility, const EducationRules& rules = {});

/// Splits an OSM `route_ref` value ("1;7, 19") into identifiers.
std::set<std::string> parse_route_refs(std::string_view value);

/// Dedup key component: trimmed, lowercased, internal whitespace collapsed.
std::string normalize_name(std::string_view name);

/// One facility per distinct (normalized name, lat at 6 dp, lon at 6 dp).
/// First occurrence wins; relative order preserved.
std::vector<Facility> dedupe_facilities(const std::vector<Facility>& facilities);

/// Expects deduplicated input.
FacilitySummary summarize_facilities(const std::vector<Facility>& facilities,
                                     const GeoPoint& center);

/// Center followed by points 550 m away at bearings 45, 135, 225 and 315 degrees.
std::vector<GeoPoint> sample_points(const GeoPoint& center);

}  // namespace urbanscore::geodata
