#pragma once

#include <string>

namespace urbanscore {

/// Mean Earth radius (IUGG), metres.
inline constexpr double kEarthRadiusM = 6371008.8;

/// WGS84 latitude/longitude in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  /// Validating constructor; throws Error(InvalidArgument) when out of range.
  static GeoPoint make(double lat, double lon);

  bool valid() const noexcept;
  std::string to_string() const;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Great-circle distance in metres (haversine).
double great_circle_m(const GeoPoint& a, const GeoPoint& b) noexcept;

/// Point reached by travelling `distance_m` from `origin` along the initial
/// bearing `bearing_deg` (clockwise from north) on a sphere.
GeoPoint destination(const GeoPoint& origin, double bearing_deg, double distance_m) noexcept;

/// Coordinate rounded to 6 decimals and scaled to an integer (micro-degrees).
long long micro_degrees(double degrees) noexcept;

}  // namespace urbanscore
