#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "locus/errors.hpp"
#include "locus/geo.hpp"
#include "locus/rng.hpp"
#include "locus/sampling.hpp"

using namespace locus;

namespace {

// Brute-force minimum within-cluster SSE over every assignment of n points
// to k clusters. Exponential; fixtures stay tiny.
double brute_force_sse(const std::vector<GeoPoint>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> assign(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::set<std::size_t> used(assign.begin(), assign.end());
    if (used.size() == k) {
      double sse = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        double mlat = 0, mlon = 0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (assign[i] == c) {
            mlat += pts[i].lat;
            mlon += pts[i].lon;
            ++cnt;
          }
        if (cnt == 0) continue;
        mlat /= cnt;
        mlon /= cnt;
        for (std::size_t i = 0; i < n; ++i)
          if (assign[i] == c) {
            double a = pts[i].lat - mlat, b = pts[i].lon - mlon;
            sse += a * a + b * b;
          }
      }
      best = std::min(best, sse);
    }
    std::size_t i = 0;
    while (i < n && assign[i] == k - 1) assign[i++] = 0;
    if (i == n) break;
    assign[i]++;
  }
  return best;
}

double result_sse(const std::vector<GeoPoint>& pts, const GeoKMeansResult& r) {
  double sse = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const GeoPoint& c = r.centroids[r.assignment[i]];
    double a = pts[i].lat - c.lat, b = pts[i].lon - c.lon;
    sse += a * a + b * b;
  }
  return sse;
}

double min_pairwise_km(const std::vector<GeoPoint>& pts) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      m = std::min(m, haversine_km(pts[i], pts[j]));
  return m;
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("kmeans degenerate configurations") {
  std::vector<GeoPoint> pts{{0, 0}, {1, 1}, {2, 0}, {3, 3}};

  SUBCASE("k equals point count: every point its own cluster") {
    SamplingConfig cfg{.k = 4, .seed = 7};
    GeoKMeansResult r = kmeans(pts, cfg);
    std::set<std::size_t> clusters(r.assignment.begin(), r.assignment.end());
    CHECK(clusters.size() == 4);
    CHECK(result_sse(pts, r) == doctest::Approx(0.0));
  }

  SUBCASE("k = 1: centroid is the arithmetic mean") {
    SamplingConfig cfg{.k = 1, .seed = 7};
    GeoKMeansResult r = kmeans(pts, cfg);
    CHECK(r.centroids[0].lat == doctest::Approx(1.5));
    CHECK(r.centroids[0].lon == doctest::Approx(1.0));
  }

  SUBCASE("invalid configurations rejected") {
    SamplingConfig cfg{.k = 5, .seed = 7};
    CHECK_THROWS_AS(kmeans(pts, cfg), ValidationError);
    CHECK_THROWS_AS(kmeans({}, SamplingConfig{.k = 1}), ValidationError);
  }
}

TEST_CASE("kmeans finds the optimal 2-clustering of two separated pairs") {
  std::vector<GeoPoint> pts{{0, 0}, {0, 1}, {10, 10}, {10, 11}};
  const double optimal = brute_force_sse(pts, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SamplingConfig cfg{.k = 2, .seed = seed};
    GeoKMeansResult r = kmeans(pts, cfg);
    CHECK(result_sse(pts, r) == doctest::Approx(optimal));
    CHECK(r.assignment[0] == r.assignment[1]);
    CHECK(r.assignment[2] == r.assignment[3]);
    CHECK(r.assignment[0] != r.assignment[2]);
  }
}

TEST_CASE("kmeans SSE is non-increasing across iterations") {
  Rng rng(11);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 120; ++i)
    pts.push_back({rng.uniform01() * 10, rng.uniform01() * 10});
  SamplingConfig cfg{.k = 7, .seed = 3, .max_iters = 50, .tol = 0.0};
  GeoKMeansResult r = kmeans(pts, cfg);
  REQUIRE(r.sse_history.size() > 1);
  for (std::size_t i = 1; i < r.sse_history.size(); ++i)
    CHECK(r.sse_history[i] <= r.sse_history[i - 1] + 1e-12);
}

TEST_CASE("sample_spread basic contracts") {
  SUBCASE("k = n returns the input points") {
    std::vector<GeoPoint> pts{{0, 0}, {1, 1}, {2, 2}};
    SamplingConfig cfg{.k = 3, .seed = 1};
    auto out = sample_spread(pts, cfg);
    REQUIRE(out.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == pts[i]);
  }

  SUBCASE("two separated pairs: medoid is the member nearer the pair mean") {
    // Pair means are (0, 0.5) and (10, 10.5); all members equidistant, so the
    // tie rule picks the lowest input index of each pair.
    std::vector<GeoPoint> pts{{0, 0}, {0, 1}, {10, 10}, {10, 11}};
    SamplingConfig cfg{.k = 2, .seed = 5};
    auto idx = sample_spread_indices(pts, cfg);
    REQUIRE(idx.size() == 2);
    CHECK(idx[0] == 0);
    CHECK(idx[1] == 2);
  }

  SUBCASE("duplicated points saturate to the distinct values") {
    GeoPoint p{1, 2}, q{5, 6};
    std::vector<GeoPoint> pts{p, p, q, q};
    SamplingConfig cfg{.k = 2, .seed = 9};
    auto out = sample_spread(pts, cfg);
    REQUIRE(out.size() == 2);
    CHECK(((out[0] == p && out[1] == q) || (out[0] == q && out[1] == p)));
  }
}

TEST_CASE("sample_spread returns exactly k members of the input") {
  Rng rng(13);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 57; ++i)
    pts.push_back({rng.uniform01() * 4 - 2, rng.uniform01() * 4 - 2});
  for (std::size_t k : {1u, 2u, 10u, 57u}) {
    SamplingConfig cfg{.k = k, .seed = 21};
    auto idx = sample_spread_indices(pts, cfg);
    CHECK(idx.size() == k);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    for (std::size_t i : idx) CHECK(i < pts.size());
  }
}

TEST_CASE("grid_split forces whole cells into one partition") {
  SUBCASE("records in a single cell share the assignment") {
    std::vector<GeoPoint> pts{{0.001, 0.001}, {0.004, 0.009}, {0.0099, 0.0001}};
    SplitConfig cfg{.cell_deg = 0.01, .train_fraction = 0.8, .seed = 77};
    auto parts = grid_split(pts, cfg);
    CHECK(parts[0] == parts[1]);
    CHECK(parts[1] == parts[2]);
  }

  SUBCASE("assignments are reproducible for a fixed seed") {
    std::vector<GeoPoint> pts{{0.005, 0.005}, {0.105, 0.005}};
    SplitConfig cfg{.cell_deg = 0.01, .train_fraction = 0.8, .seed = 1234};
    CHECK(grid_split(pts, cfg) == grid_split(pts, cfg));
  }

  SUBCASE("no cell ever straddles partitions") {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<GeoPoint> pts;
      for (int i = 0; i < 300; ++i)
        pts.push_back({50.0 + 0.02 * rng.normal(), 8.0 + 0.02 * rng.normal()});
      SplitConfig cfg{.cell_deg = 0.01, .train_fraction = 0.8,
                      .seed = 1000 + static_cast<std::uint64_t>(trial)};
      auto parts = grid_split(pts, cfg);
      std::map<GridCellId, Partition> seen;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        GridCellId c = cell_of(pts[i], cfg.cell_deg);
        auto [it, inserted] = seen.emplace(c, parts[i]);
        if (!inserted) CHECK(it->second == parts[i]);
      }
    }
  }
}

TEST_CASE("grid_split train fraction concentrates at 0.8 over 10k cells") {
  // One record per cell on a 100x100 grid; binomial concentration.
  std::vector<GeoPoint> pts;
  for (int r = 0; r < 100; ++r)
    for (int c = 0; c < 100; ++c)
      pts.push_back({r * 0.01 + 0.005, c * 0.01 + 0.005});
  for (std::uint64_t seed : {1ull, 99ull, 31337ull}) {
    SplitConfig cfg{.cell_deg = 0.01, .train_fraction = 0.8, .seed = seed};
    auto parts = grid_split(pts, cfg);
    double train = static_cast<double>(
        std::count(parts.begin(), parts.end(), Partition::Train));
    CHECK(train / parts.size() == doctest::Approx(0.8).epsilon(0.025));
  }
}

TEST_CASE("grid_split rejects invalid configs") {
  std::vector<GeoPoint> pts{{0, 0}};
  CHECK_THROWS_AS(grid_split(pts, SplitConfig{.cell_deg = 0.0}), ValidationError);
  CHECK_THROWS_AS(grid_split(pts, SplitConfig{.train_fraction = 1.0}), ValidationError);
  CHECK_THROWS_AS(grid_split(pts, SplitConfig{.train_fraction = 0.0}), ValidationError);
}

TEST_CASE("spread sampling separates better than uniform sampling on clustered pools") {
  // Pool: 90% of points in one dense disk plus a uniform background. The
  // minimum pairwise distance of k spread samples should beat k uniform
  // samples in a large majority of trials.
  int wins = 0;
  const int trials = 100;
  const std::size_t k = 15;
  for (int t = 0; t < trials; ++t) {
    Rng rng(5000 + static_cast<std::uint64_t>(t));
    std::vector<GeoPoint> pool;
    for (int i = 0; i < 360; ++i)
      pool.push_back({50.0 + 0.01 * rng.normal(), 8.0 + 0.01 * rng.normal()});
    for (int i = 0; i < 40; ++i)
      pool.push_back({49.0 + 2.0 * rng.uniform01(), 7.0 + 2.0 * rng.uniform01()});

    SamplingConfig cfg{.k = k, .seed = 9000 + static_cast<std::uint64_t>(t)};
    auto spread = sample_spread(pool, cfg);

    Rng pick(7000 + static_cast<std::uint64_t>(t));
    std::vector<GeoPoint> uniform;
    for (std::size_t i : sample_indices(pool.size(), k, pick))
      uniform.push_back(pool[i]);

    if (min_pairwise_km(spread) > min_pairwise_km(uniform)) ++wins;
  }
  CHECK(wins >= 80);
}

}  // TEST_SUITE
