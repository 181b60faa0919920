#include "urbanscore/clock.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/geo.hpp"

#include <cmath>
#include <cstdio>
#include <fmt/format.h>

namespace urbanscore {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::NoSegment: return "NoSegment";
    case ErrorCode::NoData: return "NoData";
    case ErrorCode::InvalidSample: return "InvalidSample";
    case ErrorCode::InfeasibleProfile: return "InfeasibleProfile";
    case ErrorCode::Unavailable: return "Unavailable";
    case ErrorCode::UnknownLocation: return "UnknownLocation";
    case ErrorCode::StorageUnavailable: return "StorageUnavailable";
    case ErrorCode::Duplicate: return "Duplicate";
    case ErrorCode::Unknown: return "Unknown";
    case ErrorCode::GeocodeFailed: return "GeocodeFailed";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
  }
  return "Unknown";
}

// --- clock -----------------------------------------------------------------

Timestamp SystemClock::now() const {
  return std::chrono::time_point_cast<std::chrono::microseconds>(
      std::chrono::system_clock::now());
}

Timestamp ManualClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::set(Timestamp t) {
  std::lock_guard lock(mu_);
  now_ = t;
}

void ManualClock::advance(std::chrono::microseconds d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

std::string to_iso8601(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss<microseconds> tod{t - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:06d}Z",
                     static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()), tod.hours().count(),
                     tod.minutes().count(), tod.seconds().count(),
                     tod.subseconds().count());
}

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  int consumed = 0;
  const std::string buf(text);
  if (std::sscanf(buf.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%n", &y, &mo, &d, &h, &mi, &s,
                  &consumed) != 6) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;

  long long frac_us = 0;
  std::size_t pos = static_cast<std::size_t>(consumed);
  if (pos < buf.size() && buf[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
      if (digits < 6) {
        frac_us = frac_us * 10 + (buf[pos] - '0');
        ++digits;
      }
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (; digits < 6; ++digits) frac_us *= 10;
  }
  if (pos < buf.size() && buf[pos] == 'Z') ++pos;
  if (pos != buf.size()) return std::nullopt;

  const Timestamp day_start = time_point_cast<microseconds>(sys_days{ymd});
  return day_start + hours{h} + minutes{mi} + seconds{s} + microseconds{frac_us};
}

// --- geo -------------------------------------------------------------------

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }
}  // namespace

bool GeoPoint::valid() const noexcept {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
         lon >= -180.0 && lon <= 180.0;
}

GeoPoint GeoPoint::make(double lat, double lon) {
  GeoPoint p{lat, lon};
  require(p.valid(), fmt::format("coordinates out of range: ({}, {})", lat, lon));
  return p;
}

std::string GeoPoint::to_string() const { return fmt::format("{:.6f},{:.6f}", lat, lon); }

double great_circle_m(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = deg2rad(b.lon - a.lon);
  const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

GeoPoint destination(const GeoPoint& origin, double bearing_deg, double distance_m) noexcept {
  const double delta = distance_m / kEarthRadiusM;
  const double theta = deg2rad(bearing_deg);
  const double phi1 = deg2rad(origin.lat);
  const double lambda1 = deg2rad(origin.lon);
  const double sin_phi2 =
      std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
  const double phi2 = std::asin(sin_phi2);
  const double lambda2 =
      lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                           std::cos(delta) - std::sin(phi1) * sin_phi2);
  double lon = rad2deg(lambda2);
  lon = std::fmod(lon + 540.0, 360.0) - 180.0;
  return GeoPoint{rad2deg(phi2), lon};
}

long long micro_degrees(double degrees) noexcept { return std::llround(degrees * 1e6); }

}  // namespace urbanscore
