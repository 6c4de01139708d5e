#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace locus {

// Mean Earth radius. All great-circle distances in this project use it.
inline constexpr double kEarthRadiusKm = 6371.0;

// WGS-84 coordinate in degrees. lat in [-90, 90], lon normalized to
// (-180, 180] so every location has a unique representation.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Validating factory: rejects lat outside [-90, 90] and non-finite values,
// wraps lon into (-180, 180]. Throws ValidationError.
GeoPoint make_point(double lat, double lon);

// Wraps an arbitrary finite longitude into (-180, 180]; -180 maps to +180.
double normalize_lon(double lon);

// Great-circle distance in km (haversine, R = 6371 km). Total and exactly
// symmetric in its arguments.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

// 3D unit-vector mean reprojected to the sphere. Correct across the
// antimeridian, where the arithmetic lat/lon mean is not. Throws
// ValidationError on an empty list or when the resultant vector norm
// is below 1e-9 (e.g. exact antipodes).
GeoPoint spherical_mean(std::span<const GeoPoint> points);

struct GridCellId {
  std::int64_t row = 0;
  std::int64_t col = 0;

  friend bool operator==(const GridCellId&, const GridCellId&) = default;
  friend auto operator<=>(const GridCellId&, const GridCellId&) = default;
};

// Floor-division grid cell: row = floor(lat / cell_deg), col likewise for
// lon. Throws ValidationError for cell_deg <= 0.
GridCellId cell_of(const GeoPoint& p, double cell_deg);

}  // namespace locus
