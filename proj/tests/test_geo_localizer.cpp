#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "locus/errors.hpp"
#include "locus/geo_localizer.hpp"

using namespace locus;

namespace {

GeoRecord rec(std::int64_t id, double lat, double lon,
              std::vector<float> emb, std::string label = "") {
  GeoRecord r;
  r.id = id;
  r.location = {lat, lon};
  r.embedding = std::move(emb);
  r.label = std::move(label);
  return r;
}

std::filesystem::path temp_path(const std::string& stem) {
  return std::filesystem::temp_directory_path() /
         (stem + "_" + std::to_string(std::random_device{}()) + ".jsonl");
}

}  // namespace

TEST_SUITE("geo_localizer") {

TEST_CASE("GeoIndex construction") {
  SUBCASE("records are sorted by id") {
    GeoIndex idx = GeoIndex::build_exact(
        {rec(5, 1, 1, {1, 0}), rec(2, 2, 2, {0, 1}), rec(9, 3, 3, {1, 1})});
    CHECK(idx.record(0).id == 2);
    CHECK(idx.record(1).id == 5);
    CHECK(idx.record(2).id == 9);
  }

  SUBCASE("duplicate ids rejected") {
    CHECK_THROWS_AS(
        GeoIndex::build_exact({rec(1, 0, 0, {1}), rec(1, 1, 1, {2})}),
        ValidationError);
  }

  SUBCASE("mixed embedding dims rejected") {
    CHECK_THROWS_AS(
        GeoIndex::build_exact({rec(1, 0, 0, {1, 2}), rec(2, 1, 1, {2})}),
        ValidationError);
  }

  SUBCASE("empty and embedding-less records rejected") {
    CHECK_THROWS_AS(GeoIndex::build_exact({}), ValidationError);
    CHECK_THROWS_AS(GeoIndex::build_exact({rec(1, 0, 0, {})}),
                    ValidationError);
  }
}

TEST_CASE("localize") {
  SUBCASE("nn=1 returns the top neighbor's location exactly") {
    GeoIndex idx = GeoIndex::build_exact(
        {rec(0, 48.85, 2.35, {1, 0}), rec(1, 52.52, 13.40, {0, 1})});
    std::vector<float> q{0.9f, 0.1f};
    GeoEstimate est = localize(q, idx, 1);
    CHECK(est.neighbors.size() == 1);
    CHECK(est.predicted == GeoPoint{48.85, 2.35});
  }

  SUBCASE("indexed query vector localizes to its own record, error 0") {
    GeoIndex idx = GeoIndex::build_exact(
        {rec(0, 10, 20, {1, 0, 0}), rec(1, 30, 40, {0, 1, 0}),
         rec(2, -5, 60, {0, 0, 1})});
    GeoEstimate est = localize(idx.record(1).embedding, idx, 1);
    CHECK(haversine_km(est.predicted, idx.record(1).location) == 0.0);
  }

  SUBCASE("nn=2 midpoint on a meridian-symmetric pair") {
    GeoIndex idx = GeoIndex::build_exact(
        {rec(0, 0, 0, {1, 0}), rec(1, 0, 2, {1, 0})});
    std::vector<float> q{1, 0};
    GeoEstimate est = localize(q, idx, 2);
    CHECK(est.predicted.lat == doctest::Approx(0.0));
    CHECK(est.predicted.lon == doctest::Approx(1.0));
  }

  SUBCASE("antimeridian neighbors average on the sphere, not in degrees") {
    GeoIndex idx = GeoIndex::build_exact(
        {rec(0, 0, 179, {1, 0}), rec(1, 0, -179, {1, 0}),
         rec(2, 0, 177, {1, 0}), rec(3, 0, 0, {0, 1})});
    std::vector<float> q{1, 0};
    GeoEstimate est = localize(q, idx, 3);
    // Arithmetic degree mean would be (179 - 179 + 177) / 3 = 59.
    CHECK(std::abs(est.predicted.lon) > 170.0);
    CHECK(est.predicted.lat == doctest::Approx(0.0));
  }

  SUBCASE("nn out of range") {
    GeoIndex idx = GeoIndex::build_exact({rec(0, 0, 0, {1})});
    std::vector<float> q{1};
    CHECK_THROWS_AS(localize(q, idx, 0), ValidationError);
    CHECK_THROWS_AS(localize(q, idx, 2), ValidationError);
  }
}

TEST_CASE("evaluate fixtures") {
  SUBCASE("perfect predictions") {
    std::vector<GeoRecord> base{rec(0, 10, 20, {1, 0}), rec(1, 30, 40, {0, 1})};
    GeoIndex idx = GeoIndex::build_exact(base);
    std::vector<GeoRecord> queries{rec(100, 10, 20, {1, 0}),
                                   rec(101, 30, 40, {0, 1})};
    std::vector<std::size_t> nns{1};
    EvalReport rep = evaluate(queries, idx, nns);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].mean_error_km == 0.0);
    CHECK(rep.rows[0].acc_1km == 1.0);
    CHECK(rep.rows[0].acc_25km == 1.0);
    CHECK(rep.rows[0].acc_200km == 1.0);
    CHECK(rep.overlapping_ids == 0);
  }

  SUBCASE("errors 0.5 km and 100 km force the arithmetic") {
    // Index holds one record at the origin; query truths sit 0.5 km and
    // 100 km due north of it.
    const double deg_per_km = 180.0 / (kEarthRadiusKm * 3.14159265358979323846);
    GeoIndex idx = GeoIndex::build_exact({rec(0, 0, 0, {1})});
    std::vector<GeoRecord> queries{rec(100, 0.5 * deg_per_km, 0, {1}),
                                   rec(101, 100.0 * deg_per_km, 0, {1})};
    std::vector<std::size_t> nns{1};
    EvalReport rep = evaluate(queries, idx, nns);
    CHECK(rep.rows[0].mean_error_km == doctest::Approx(50.25));
    CHECK(rep.rows[0].acc_1km == doctest::Approx(0.5));
    CHECK(rep.rows[0].acc_25km == doctest::Approx(0.5));
    CHECK(rep.rows[0].acc_200km == doctest::Approx(1.0));
  }

  SUBCASE("query permutation leaves the report bit-identical") {
    std::vector<GeoRecord> base;
    for (int i = 0; i < 12; ++i)
      base.push_back(rec(i, i * 1.5, i * 2.0,
                         {static_cast<float>(i), static_cast<float>(i % 3)}));
    GeoIndex idx = GeoIndex::build_exact(base);
    std::vector<GeoRecord> queries;
    for (int i = 0; i < 8; ++i)
      queries.push_back(rec(100 + i, i * 1.4 + 0.3, i * 2.1 + 0.2,
                            {static_cast<float>(i) + 0.25f,
                             static_cast<float>((i + 1) % 3)}));
    std::vector<std::size_t> nns{1, 3};
    EvalReport a = evaluate(queries, idx, nns);
    std::reverse(queries.begin(), queries.end());
    EvalReport b = evaluate(queries, idx, nns);
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
      CHECK(a.rows[r].mean_error_km == b.rows[r].mean_error_km);
      CHECK(a.rows[r].acc_1km == b.rows[r].acc_1km);
      CHECK(a.rows[r].acc_25km == b.rows[r].acc_25km);
      CHECK(a.rows[r].acc_200km == b.rows[r].acc_200km);
    }
  }

  SUBCASE("id overlap with the index is counted") {
    GeoIndex idx = GeoIndex::build_exact({rec(0, 0, 0, {1}), rec(1, 1, 1, {2})});
    std::vector<GeoRecord> queries{rec(1, 1, 1, {2}), rec(7, 2, 2, {3})};
    std::vector<std::size_t> nns{1};
    EvalReport rep = evaluate(queries, idx, nns);
    CHECK(rep.overlapping_ids == 1);
  }

  SUBCASE("validation") {
    GeoIndex idx = GeoIndex::build_exact({rec(0, 0, 0, {1})});
    std::vector<GeoRecord> queries{rec(1, 0, 0, {1})};
    std::vector<std::size_t> empty_nns;
    std::vector<std::size_t> big_nns{2};
    std::vector<GeoRecord> no_queries;
    std::vector<std::size_t> nns{1};
    CHECK_THROWS_AS(evaluate(no_queries, idx, nns), ValidationError);
    CHECK_THROWS_AS(evaluate(queries, idx, empty_nns), ValidationError);
    CHECK_THROWS_AS(evaluate(queries, idx, big_nns), ValidationError);
  }
}

TEST_CASE("synth_dataset") {
  std::vector<CitySpec> cities{{"paris", {48.8566, 2.3522}, 40},
                               {"berlin", {52.52, 13.405}, 40},
                               {"rome", {41.9, 12.49}, 0},
                               {"madrid", {40.4168, -3.7038}, 40}};

  SUBCASE("zero-count city is absent; labels and ids are sequential") {
    auto data = synth_dataset(cities, 8, 5.0, 0.05, 11);
    CHECK(data.size() == 120);
    CHECK(std::none_of(data.begin(), data.end(), [](const GeoRecord& r) {
      return r.label == "rome";
    }));
    for (std::size_t i = 0; i < data.size(); ++i)
      CHECK(data[i].id == static_cast<std::int64_t>(i));
  }

  SUBCASE("deterministic per seed") {
    auto a = synth_dataset(cities, 8, 5.0, 0.05, 11);
    auto b = synth_dataset(cities, 8, 5.0, 0.05, 11);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].location == b[i].location);
      CHECK(a[i].embedding == b[i].embedding);
    }
    auto c = synth_dataset(cities, 8, 5.0, 0.05, 12);
    CHECK(a[0].location != c[0].location);
  }

  SUBCASE("zero noise collapses same-city embeddings") {
    auto data = synth_dataset(cities, 8, 5.0, 0.0, 3);
    for (const GeoRecord& r : data)
      if (r.label == "paris") CHECK(r.embedding == data[0].embedding);
  }

  SUBCASE("two cities with small noise: top-1 is same-city >= 99%") {
    std::vector<CitySpec> two{{"a", {10, 10}, 100}, {"b", {50, 50}, 100}};
    auto data = synth_dataset(two, 4, 3.0, 0.05, 21);
    // Odd positions are queries, even positions the index.
    std::vector<GeoRecord> base, queries;
    for (std::size_t i = 0; i < data.size(); ++i)
      (i % 2 ? queries : base).push_back(data[i]);
    GeoIndex idx = GeoIndex::build_exact(base);
    int same = 0;
    for (const GeoRecord& q : queries) {
      GeoEstimate est = localize(q.embedding, idx, 1);
      if (idx.record(est.neighbors[0].id).label == q.label) ++same;
    }
    CHECK(same >= static_cast<int>(queries.size() * 99) / 100);
  }

  SUBCASE("validation") {
    CHECK_THROWS_AS(synth_dataset(cities, 0, 1.0, 0.1, 1), ValidationError);
    CHECK_THROWS_AS(synth_dataset(cities, 2, 1.0, 0.1, 1), ValidationError);
    CHECK_THROWS_AS(synth_dataset(cities, 8, -1.0, 0.1, 1), ValidationError);
    CHECK_THROWS_AS(synth_dataset(cities, 8, 1.0, -0.1, 1), ValidationError);
  }
}

TEST_CASE("four-city end-to-end accuracy") {
  std::vector<CitySpec> cities{{"paris", {48.8566, 2.3522}, 60},
                               {"berlin", {52.52, 13.405}, 60},
                               {"rome", {41.9, 12.49}, 60},
                               {"madrid", {40.4168, -3.7038}, 60}};
  auto data = synth_dataset(cities, 8, 5.0, 0.05, 99);
  std::vector<GeoRecord> base, queries;
  for (std::size_t i = 0; i < data.size(); ++i)
    (i % 4 == 0 ? queries : base).push_back(data[i]);

  SUBCASE("exact index reaches acc@25 >= 0.9 at nn=1") {
    GeoIndex idx = GeoIndex::build_exact(base);
    EvalReport rep = evaluate(queries, idx, kDefaultNnChoices);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].nn == 1);
    CHECK(rep.rows[0].acc_25km >= 0.9);
    for (const EvalRow& row : rep.rows) {
      CHECK(row.acc_1km <= row.acc_25km);
      CHECK(row.acc_25km <= row.acc_200km);
    }
  }

  SUBCASE("quantized index reaches acc@25 >= 0.9 at nn=1") {
    PQConfig cfg{.m = 4, .k_centroids = 16, .train_iters = 10, .seed = 7};
    GeoIndex idx = GeoIndex::build_pq(base, cfg);
    CHECK(idx.quantized());
    EvalReport rep = evaluate(queries, idx, kDefaultNnChoices);
    CHECK(rep.rows[0].acc_25km >= 0.9);
  }
}

TEST_CASE("eval report csv shape") {
  GeoIndex idx = GeoIndex::build_exact(
      {rec(0, 0, 0, {1, 0}), rec(1, 1, 1, {0, 1}), rec(2, 2, 2, {1, 1})});
  std::vector<GeoRecord> queries{rec(10, 0, 0, {1, 0}), rec(11, 1, 1, {0, 1})};
  std::vector<std::size_t> nns{1, 2, 3};
  EvalReport rep = evaluate(queries, idx, nns);
  std::string csv = eval_report_csv(rep, "synth-8d");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "descriptor,nn,mean_error_km,acc_1km,acc_25km,acc_200km");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
    CHECK(line.substr(0, 9) == "synth-8d,");
  }
  CHECK(rows == 3);
}

TEST_CASE("jsonl io") {
  SUBCASE("inline embedding round trip") {
    auto path = temp_path("locus_geo");
    std::vector<GeoRecord> recs{rec(3, 1.25, -2.5, {0.5f, 1.5f}, "x"),
                                rec(1, -10, 30, {2.0f, -4.0f})};
    write_georecords_jsonl(path, recs);
    auto back = read_georecords_jsonl(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == 3);
    CHECK(back[0].location == recs[0].location);
    CHECK(back[0].embedding == recs[0].embedding);
    CHECK(back[0].label == "x");
    CHECK(back[1].label.empty());
    std::filesystem::remove(path);
  }

  SUBCASE("vec_row references resolve through a vector set") {
    auto path = temp_path("locus_vecrow");
    std::ofstream(path) << R"({"id":1,"lat":2,"lon":3,"vec_row":1})" << "\n"
                        << R"({"id":2,"lat":4,"lon":5,"vec_row":0})" << "\n";
    VectorSet vs{2, {10, 11, 20, 21}};
    auto recs = read_georecords_jsonl(path, &vs);
    CHECK(recs[0].embedding == std::vector<float>{20, 21});
    CHECK(recs[1].embedding == std::vector<float>{10, 11});
    CHECK_THROWS_AS(read_georecords_jsonl(path), ValidationError);
    std::filesystem::remove(path);
  }

  SUBCASE("vec_row out of range rejected") {
    auto path = temp_path("locus_vecrow_oob");
    std::ofstream(path) << R"({"id":1,"lat":2,"lon":3,"vec_row":9})" << "\n";
    VectorSet vs{2, {10, 11}};
    CHECK_THROWS_AS(read_georecords_jsonl(path, &vs), ValidationError);
    std::filesystem::remove(path);
  }

  SUBCASE("malformed line names the line number") {
    auto path = temp_path("locus_badjson");
    std::ofstream(path) << R"({"id":1,"lat":2,"lon":3})" << "\n"
                        << "{oops\n";
    try {
      read_georecords_jsonl(path);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::filesystem::remove(path);
  }

  SUBCASE("missing file names the path") {
    CHECK_THROWS_AS(read_georecords_jsonl("/nonexistent/d.jsonl"),
                    ValidationError);
  }
}

}  // TEST_SUITE
