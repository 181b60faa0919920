#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <string>

#include "urbanscore/explain/explain.hpp"

namespace urbanscore::explain {
namespace {

// Pollutant and unit symbols that contain digits but are not route numbers.
const std::set<std::string> kSymbolWhitelist{"pm25", "pm2.5", "pm2,5", "pm10", "no2", "o3", "nh3",
                                             "so2",  "co2",   "m2",    "m3",   "km2", "h24"};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

long long tenths(double v) { return static_cast<long long>(std::floor(v * 10.0 + 0.5)); }

// Maximal runs of ASCII letters/digits; '.' or ',' is kept only between two digits.
std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (is_digit(c) || is_alpha(c)) {
      cur.push_back(c);
    } else if ((c == '.' || c == ',') && !cur.empty() && is_digit(cur.back()) && i + 1 < text.size() &&
               is_digit(text[i + 1])) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int count_words(std::string_view text) {
  int n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

GroundingResult ground_check(std::string_view text_in, const ExplainPayload& payload) {
  std::string text(text_in);
  // Longest names first so a name containing another is removed whole.
  std::vector<std::string> names;
  for (const auto& f : payload.top_facilities)
    if (!f.name.empty()) names.push_back(f.name);
  std::sort(names.begin(), names.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (const auto& name : names) {
    for (auto pos = text.find(name); pos != std::string::npos; pos = text.find(name, pos))
      text.replace(pos, name.size(), std::string(name.size(), ' '));
  }

  std::vector<double> numbers;
  for (double v : payload.sub_scores.as_array()) numbers.push_back(v);
  numbers.push_back(payload.aggregate);
  numbers.push_back(payload.radius_m);
  numbers.push_back(100.0);  // score scale
  for (const auto& f : payload.top_facilities) numbers.push_back(f.distance_m);

  std::set<std::string> routes;
  for (const auto& r : payload.routes) routes.insert(lower(r));

  GroundingResult result;
  for (const auto& tok : tokens(text)) {
    const bool has_digit = std::any_of(tok.begin(), tok.end(), is_digit);
    if (!has_digit) continue;
    const bool has_alpha = std::any_of(tok.begin(), tok.end(), is_alpha);
    const std::string low = lower(tok);
    if (routes.contains(low)) continue;
    if (has_alpha) {
      if (!kSymbolWhitelist.contains(low)) result.ungrounded.push_back(tok);
      continue;
    }
    std::string normal = tok;
    std::replace(normal.begin(), normal.end(), ',', '.');
    const double x = std::stod(normal);
    const bool integer = normal.find('.') == std::string::npos;
    const bool ok = std::any_of(numbers.begin(), numbers.end(), [&](double p) {
      return tenths(p) == tenths(x) || (integer && std::floor(p + 0.5) == x);
    });
    if (!ok) result.ungrounded.push_back(tok);
  }
  result.grounded = result.ungrounded.empty();
  return result;
}

}  // namespace urbanscore::explain
