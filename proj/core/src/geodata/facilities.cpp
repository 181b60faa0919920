#include "urbanscore/geodata/facilities.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <set>
#include <tuple>

#include "urbanscore/scoring/scoring.hpp"

namespace urbanscore::geodata {

namespace {

struct Fold {
  std::string_view utf8;
  char ascii;
};

// Romanian diacritics, both comma-below and cedilla variants.
constexpr std::array<Fold, 14> kFolds{{
    {"\xC4\x83", 'a'}, {"\xC4\x82", 'a'},  // ă Ă
    {"\xC3\xA2", 'a'}, {"\xC3\x82", 'a'},  // â Â
    {"\xC3\xAE", 'i'}, {"\xC3\x8E", 'i'},  // î Î
    {"\xC8\x99", 's'}, {"\xC8\x98", 's'},  // ș Ș
    {"\xC5\x9F", 's'}, {"\xC5\x9E", 's'},  // ş Ş
    {"\xC8\x9B", 't'}, {"\xC8\x9A", 't'},  // ț Ț
    {"\xC5\xA3", 't'}, {"\xC5\xA2", 't'},  // ţ Ţ
}};

std::string tag(const std::map<std::string, std::string>& tags, const std::string& key) {
  auto it = tags.find(key);
  return it == tags.end() ? std::string{} : it->second;
}

std::vector<int> integers_in(std::string_view s) {
  std::vector<int> out;
  int cur = -1;
  for (char ch : s) {
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      cur = (cur < 0 ? 0 : cur * 10) + (ch - '0');
      if (cur > 1000) cur = 1000;
    } else if (cur >= 0) {
      out.push_back(cur);
      cur = -1;
    }
  }
  if (cur >= 0) out.push_back(cur);
  return out;
}

bool any_at_least(const std::vector<int>& values, int threshold) {
  return std::any_of(values.begin(), values.end(), [&](int v) { return v >= threshold; });
}

bool is_kindergarten(const std::map<std::string, std::string>& tags) {
  return tag(tags, "amenity") == "kindergarten";
}

FacilityCategory classify_tags(const std::map<std::string, std::string>& tags,
                               const std::string& name, const EducationRules& rules) {
  if (is_kindergarten(tags)) return FacilityCategory::Kindergarten;
  if (any_at_least(integers_in(tag(tags, "isced:level")), 3)) return FacilityCategory::HighSchool;
  if (any_at_least(integers_in(tag(tags, "grades")), 9)) return FacilityCategory::HighSchool;

  const std::string folded_name = fold_text(name);
  const std::string folded_operator = fold_text(tag(tags, "operator"));
  for (const auto& kw : rules.highschool_keywords) {
    const std::string k = fold_text(kw);
    if (k.empty()) continue;
    if (folded_name.find(k) != std::string::npos || folded_operator.find(k) != std::string::npos)
      return FacilityCategory::HighSchool;
  }
  return FacilityCategory::PrimarySchool;
}

}  // namespace

std::string fold_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool folded = false;
    for (const auto& f : kFolds) {
      if (text.substr(i, f.utf8.size()) == f.utf8) {
        out.push_back(f.ascii);
        i += f.utf8.size();
        folded = true;
        break;
      }
    }
    if (folded) continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
    ++i;
  }
  return out;
}

bool is_school_like(const std::map<std::string, std::string>& tags) noexcept {
  const auto it = tags.find("amenity");
  return it != tags.end() && (it->second == "school" || it->second == "kindergarten");
}

std::optional<FacilityCategory> categorize(const std::map<std::string, std::string>& tags,
                                           const EducationRules& rules) {
  const std::string amenity = tag(tags, "amenity");
  if (tag(tags, "shop") == "supermarket") return FacilityCategory::Supermarket;
  if (amenity == "restaurant") return FacilityCategory::Restaurant;
  if (amenity == "fast_food") return FacilityCategory::FastFood;
  if (tag(tags, "leisure") == "park") return FacilityCategory::Park;
  if (amenity == "kindergarten" || amenity == "school")
    return classify_tags(tags, tag(tags, "name"), rules);
  const std::string railway = tag(tags, "railway");
  if (railway == "subway_entrance") return FacilityCategory::MetroEntrance;
  if (railway == "tram_stop") return FacilityCategory::TramStop;
  const std::string pt = tag(tags, "public_transport");
  if ((pt == "platform" || pt == "stop_position") && tag(tags, "tram") == "yes")
    return FacilityCategory::TramStop;
  if (tag(tags, "highway") == "bus_stop") return FacilityCategory::BusStop;
  if ((pt == "platform" || pt == "stop_position") && tag(tags, "bus") == "yes")
    return FacilityCategory::BusStop;
  return std::nullopt;
}

FacilityCategory classify_education(const Facility& facility, const EducationRules& rules) {
  if (facility.category == FacilityCategory::Kindergarten) return FacilityCategory::Kindergarten;
  return classify_tags(facility.tags, facility.name, rules);
}

std::set<std::string> parse_route_refs(std::string_view value) {
  std::set<std::string> out;
  std::string cur;
  auto push = [&] {
    const auto b = cur.find_first_not_of(" \t");
    if (b != std::string::npos) {
      const auto e = cur.find_last_not_of(" \t");
      out.insert(cur.substr(b, e - b + 1));
    }
    cur.clear();
  };
  for (char ch : value) {
    if (ch == ';' || ch == ',') {
      push();
    } else {
      cur.push_back(ch);
    }
  }
  push();
  return out;
}

std::string normalize_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char ch : name) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

std::vector<Facility> dedupe_facilities(const std::vector<Facility>& facilities) {
  using Key = std::tuple<std::string, long long, long long>;
  std::set<Key> seen;
  std::vector<Facility> out;
  out.reserve(facilities.size());
  for (const auto& f : facilities) {
    Key key{normalize_name(f.name), micro_degrees(f.point.lat), micro_degrees(f.point.lon)};
    if (seen.insert(std::move(key)).second) out.push_back(f);
  }
  return out;
}

FacilitySummary summarize_facilities(const std::vector<Facility>& facilities,
                                     const GeoPoint& center) {
  FacilitySummary s;
  for (auto c : kAllFacilityCategories) s.counts[c] = 0;
  for (const auto& f : facilities) {
    ++s.counts[f.category];
    const double d = great_circle_m(center, f.point);
    if (is_transport_stop(f.category)) s.routes.insert(f.route_refs.begin(), f.route_refs.end());
    if (f.category == FacilityCategory::MetroEntrance &&
        (!s.nearest_metro_m || d < *s.nearest_metro_m)) {
      s.nearest_metro_m = d;
    }
    if (is_school(f.category)) s.schools.push_back({f.category, d});
  }
  s.entropy_nats = scoring::shannon_entropy(s.lifestyle_counts());
  return s;
}

std::vector<GeoPoint> sample_points(const GeoPoint& center) {
  std::vector<GeoPoint> pts{center};
  for (double bearing : {45.0, 135.0, 225.0, 315.0})
    pts.push_back(destination(center, bearing, kTrafficOffsetM));
  return pts;
}

}  // namespace urbanscore::geodata
