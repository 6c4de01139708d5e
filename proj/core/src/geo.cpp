#include "locus/geo.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "locus/errors.hpp"

namespace locus {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}  // namespace

double normalize_lon(double lon) {
  double x = std::fmod(lon, 360.0);
  if (x <= -180.0) x += 360.0;
  if (x > 180.0) x -= 360.0;
  return x;
}

GeoPoint make_point(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon))
    throw ValidationError("non-finite coordinate");
  if (lat < -90.0 || lat > 90.0)
    throw ValidationError("latitude out of range: " + std::to_string(lat));
  return GeoPoint{lat, normalize_lon(lon)};
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlam = (b.lon - a.lon) * kDegToRad;
  const double sp = std::sin(dphi * 0.5);
  const double sl = std::sin(dlam * 0.5);
  const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
  // atan2 form: better conditioned near antipodes than asin(sqrt(h)).
  return 2.0 * kEarthRadiusKm *
         std::atan2(std::sqrt(h), std::sqrt(std::fmax(0.0, 1.0 - h)));
}

GeoPoint spherical_mean(std::span<const GeoPoint> points) {
  if (points.empty()) throw ValidationError("spherical_mean of empty list");
  // The mean of one point is that point; skip the trig round trip so the
  // result is bit-exact.
  if (points.size() == 1)
    return GeoPoint{points[0].lat, normalize_lon(points[0].lon)};
  double x = 0.0, y = 0.0, z = 0.0;
  for (const GeoPoint& p : points) {
    const double phi = p.lat * kDegToRad;
    const double lam = p.lon * kDegToRad;
    const double c = std::cos(phi);
    x += c * std::cos(lam);
    y += c * std::sin(lam);
    z += std::sin(phi);
  }
  const double n = static_cast<double>(points.size());
  x /= n;
  y /= n;
  z /= n;
  const double norm = std::sqrt(x * x + y * y + z * z);
  if (norm < 1e-9)
    throw ValidationError("spherical_mean degenerate: resultant vector ~0");
  const double lat = std::atan2(z, std::hypot(x, y)) * kRadToDeg;
  const double lon = std::atan2(y, x) * kRadToDeg;
  return GeoPoint{lat, normalize_lon(lon)};
}

GridCellId cell_of(const GeoPoint& p, double cell_deg) {
  if (!(cell_deg > 0.0))
    throw ValidationError("cell size must be positive");
  return GridCellId{static_cast<std::int64_t>(std::floor(p.lat / cell_deg)),
                    static_cast<std::int64_t>(std::floor(p.lon / cell_deg))};
}

}  // namespace locus
