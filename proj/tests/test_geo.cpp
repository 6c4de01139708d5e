#include <doctest.h>

#include <cmath>
#include <vector>

#include "locus/errors.hpp"
#include "locus/geo.hpp"
#include "locus/rng.hpp"

using namespace locus;

namespace {

GeoPoint random_point(Rng& rng) {
  return GeoPoint{rng.uniform01() * 180.0 - 90.0,
                  normalize_lon(rng.uniform01() * 360.0 - 180.0)};
}

}  // namespace

TEST_SUITE("geo") {

TEST_CASE("haversine reference distances") {
  // Independent haversine calculator, R = 6371 km.
  CHECK(haversine_km({48.8566, 2.3522}, {52.5200, 13.4050}) ==
        doctest::Approx(877.463).epsilon(0.0006));
  GeoPoint p{12.5, -33.25};
  CHECK(haversine_km(p, p) == 0.0);
  // Antipodal pair: half circumference.
  CHECK(haversine_km({0, 0}, {0, 180}) ==
        doctest::Approx(20015.0868).epsilon(1e-6));
}

TEST_CASE("haversine is exactly symmetric") {
  Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    GeoPoint a = random_point(rng), b = random_point(rng);
    CHECK(haversine_km(a, b) == haversine_km(b, a));
  }
}

TEST_CASE("haversine triangle inequality") {
  Rng rng(42);
  for (int i = 0; i < 300; ++i) {
    GeoPoint a = random_point(rng), b = random_point(rng), c = random_point(rng);
    CHECK(haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-9);
  }
}

TEST_CASE("spherical_mean basics") {
  GeoPoint p{37.3, -17.9};
  std::vector<GeoPoint> one{p};
  GeoPoint m = spherical_mean(one);
  CHECK(m.lat == doctest::Approx(p.lat).epsilon(1e-12));
  CHECK(m.lon == doctest::Approx(p.lon).epsilon(1e-12));

  std::vector<GeoPoint> sym{{10, 50}, {-10, 50}};
  m = spherical_mean(sym);
  CHECK(m.lat == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.lon == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("spherical_mean crosses the antimeridian") {
  // 3D vector mean of lon 179 and -179 points to lon 180, not lon 0.
  std::vector<GeoPoint> pts{{0, 179}, {0, -179}};
  GeoPoint m = spherical_mean(pts);
  CHECK(m.lat == doctest::Approx(0.0));
  CHECK(m.lon == doctest::Approx(180.0));
}

TEST_CASE("spherical_mean rejects empty and antipodal input") {
  CHECK_THROWS_AS(spherical_mean({}), ValidationError);
  std::vector<GeoPoint> anti{{0, 0}, {0, 180}};
  CHECK_THROWS_AS(spherical_mean(anti), ValidationError);
}

TEST_CASE("spherical_mean is permutation invariant") {
  Rng rng(43);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 9; ++i) pts.push_back(random_point(rng));
  GeoPoint m1 = spherical_mean(pts);
  std::vector<GeoPoint> shuffled = pts;
  shuffle(shuffled, rng);
  GeoPoint m2 = spherical_mean(shuffled);
  CHECK(m1.lat == doctest::Approx(m2.lat).epsilon(1e-12));
  CHECK(m1.lon == doctest::Approx(m2.lon).epsilon(1e-12));
}

TEST_CASE("spherical_mean agrees with arithmetic mean in a small patch") {
  Rng rng(44);
  std::vector<GeoPoint> pts;
  double slat = 0, slon = 0;
  for (int i = 0; i < 20; ++i) {
    GeoPoint p{47.0 + 0.05 * rng.normal(), 8.0 + 0.05 * rng.normal()};
    slat += p.lat;
    slon += p.lon;
    pts.push_back(p);
  }
  GeoPoint m = spherical_mean(pts);
  CHECK(m.lat == doctest::Approx(slat / 20).epsilon(1e-6));
  CHECK(m.lon == doctest::Approx(slon / 20).epsilon(1e-6));
}

TEST_CASE("cell_of floor semantics") {
  CHECK(cell_of({0.005, 0.005}, 0.01) == GridCellId{0, 0});
  CHECK(cell_of({-0.005, 0.005}, 0.01) == GridCellId{-1, 0});
  CHECK(cell_of({48.8566, 2.3522}, 0.01) == GridCellId{4885, 235});
  CHECK_THROWS_AS(cell_of({0, 0}, 0.0), ValidationError);
  CHECK_THROWS_AS(cell_of({0, 0}, -1.0), ValidationError);
}

TEST_CASE("cell_of partitions the plane") {
  Rng rng(45);
  for (int i = 0; i < 200; ++i) {
    GeoPoint p = random_point(rng);
    GridCellId c = cell_of(p, 0.25);
    // Nudging within the cell interior never changes the id.
    double dl = std::fmod(p.lat, 0.25);
    if (dl < 0) dl += 0.25;
    double dn = std::fmod(p.lon, 0.25);
    if (dn < 0) dn += 0.25;
    GeoPoint q{p.lat + (0.25 - dl) * 0.5, p.lon + (0.25 - dn) * 0.5};
    CHECK(cell_of(q, 0.25) == c);
  }
}

TEST_CASE("make_point validates and normalizes") {
  CHECK_THROWS_AS(make_point(91.0, 0.0), ValidationError);
  CHECK_THROWS_AS(make_point(-90.5, 0.0), ValidationError);
  CHECK(make_point(0.0, -180.0).lon == 180.0);
  CHECK(make_point(0.0, 190.0).lon == doctest::Approx(-170.0));
  CHECK(make_point(0.0, 540.0).lon == doctest::Approx(180.0));
  CHECK(make_point(45.0, 45.0).lon == 45.0);
}

}  // TEST_SUITE
