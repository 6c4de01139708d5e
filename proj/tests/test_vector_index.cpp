#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "locus/errors.hpp"
#include "locus/rng.hpp"
#include "locus/vector_index.hpp"

using namespace locus;

namespace {

VectorSet make_set(std::size_t dim, std::vector<float> data) {
  return VectorSet{dim, std::move(data)};
}

VectorSet gaussian_set(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  VectorSet vs;
  vs.dim = dim;
  vs.data.resize(n * dim);
  for (float& x : vs.data) x = static_cast<float>(rng.normal());
  return vs;
}

// Independent full-scan oracle with the same accumulation order.
std::vector<Neighbor> naive_knn(std::span<const float> q, const VectorSet& vs,
                                std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < vs.count(); ++i) {
    double dist = 0.0;
    for (std::size_t d = 0; d < vs.dim; ++d) {
      double diff = static_cast<double>(q[d]) -
                    static_cast<double>(vs.data[i * vs.dim + d]);
      dist += diff * diff;
    }
    all.emplace_back(dist, i);
  }
  std::sort(all.begin(), all.end());
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({all[i].second, all[i].first});
  return out;
}

}  // namespace

TEST_SUITE("vector_index") {

TEST_CASE("exact_knn fixtures") {
  SUBCASE("3-4-5 distances") {
    VectorSet vs = make_set(2, {0, 0, 3, 4});
    std::vector<float> q{0, 0};
    auto nn = exact_knn(q, vs, 2);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0] == Neighbor{0, 0.0});
    CHECK(nn[1] == Neighbor{1, 25.0});
  }

  SUBCASE("query equal to an indexed vector comes back first at distance 0") {
    VectorSet vs = gaussian_set(30, 4, 3);
    std::vector<float> q(vs.row(17).begin(), vs.row(17).end());
    auto nn = exact_knn(q, vs, 3);
    CHECK(nn[0].id == 17);
    CHECK(nn[0].distance == 0.0);
  }

  SUBCASE("equal distances break ties by ascending id") {
    VectorSet vs = make_set(2, {1, 1, 1, 1, 1, 1});
    std::vector<float> q{0, 0};
    auto nn = exact_knn(q, vs, 3);
    CHECK(nn[0].id == 0);
    CHECK(nn[1].id == 1);
    CHECK(nn[2].id == 2);
  }

  SUBCASE("validation") {
    VectorSet vs = make_set(2, {0, 0, 3, 4});
    std::vector<float> q3{0, 0, 0};
    std::vector<float> q2{0, 0};
    CHECK_THROWS_AS(exact_knn(q3, vs, 1), ValidationError);
    CHECK_THROWS_AS(exact_knn(q2, vs, 3), ValidationError);
    CHECK_THROWS_AS(exact_knn(q2, vs, 0), ValidationError);
  }
}

TEST_CASE("exact_knn matches the naive oracle on random data") {
  VectorSet vs = gaussian_set(100, 8, 41);
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<float> q(8);
    for (float& x : q) x = static_cast<float>(rng.normal());
    auto got = exact_knn(q, vs, 10);
    auto want = naive_knn(q, vs, 10);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].id == want[i].id);
      CHECK(got[i].distance == want[i].distance);
    }
  }
}

TEST_CASE("train_codebook") {
  SUBCASE("shape: dim=8, m=4 gives 4 tables of k_centroids x 2") {
    VectorSet vs = gaussian_set(40, 8, 7);
    PQConfig cfg{.m = 4, .k_centroids = 8, .train_iters = 10, .seed = 1};
    PQCodebook cb = train_codebook(vs, cfg);
    CHECK(cb.m == 4);
    CHECK(cb.slice_dim() == 2);
    CHECK(cb.centroids.size() == 4 * 8 * 2);
  }

  SUBCASE("two distinct vectors, m=2, k=2: centroids are the slice values") {
    VectorSet vs = make_set(2, {1.0f, 2.0f, 5.0f, 6.0f});
    PQConfig cfg{.m = 2, .k_centroids = 2, .train_iters = 10, .seed = 9};
    PQCodebook cb = train_codebook(vs, cfg);
    for (std::size_t s = 0; s < 2; ++s) {
      std::set<double> got{cb.centroid(s, 0)[0], cb.centroid(s, 1)[0]};
      std::set<double> want{static_cast<double>(vs.data[s]),
                            static_cast<double>(vs.data[2 + s])};
      CHECK(got == want);
    }
  }

  SUBCASE("identical training vectors still encode with zero error") {
    VectorSet vs;
    vs.dim = 4;
    for (int i = 0; i < 10; ++i)
      vs.data.insert(vs.data.end(), {1.5f, -2.0f, 3.0f, 0.25f});
    PQConfig cfg{.m = 2, .k_centroids = 4, .train_iters = 5, .seed = 3};
    PQCodebook cb = train_codebook(vs, cfg);
    CHECK(reconstruction_error(vs.row(0), cb) == 0.0);
  }

  SUBCASE("deterministic for a fixed seed") {
    VectorSet vs = gaussian_set(60, 8, 19);
    PQConfig cfg{.m = 4, .k_centroids = 16, .train_iters = 8, .seed = 77};
    PQCodebook a = train_codebook(vs, cfg);
    PQCodebook b = train_codebook(vs, cfg);
    CHECK(a.centroids == b.centroids);
  }

  SUBCASE("validation") {
    VectorSet vs = gaussian_set(10, 8, 1);
    CHECK_THROWS_AS(
        train_codebook(vs, PQConfig{.m = 3, .k_centroids = 4}),
        ValidationError);  // 3 does not divide 8
    CHECK_THROWS_AS(
        train_codebook(vs, PQConfig{.m = 4, .k_centroids = 16}),
        ValidationError);  // more centroids than vectors
    CHECK_THROWS_AS(train_codebook(vs, PQConfig{.m = 4, .k_centroids = 1}),
                    ValidationError);
  }
}

TEST_CASE("default_pq_m divides dim and respects the cap") {
  CHECK(default_pq_m(64) == 16);
  CHECK(default_pq_m(128) == 16);
  CHECK(default_pq_m(16) == 4);
  CHECK(default_pq_m(6) == 1);   // 6/4 = 1
  CHECK(default_pq_m(20) == 5);  // 20/4 = 5 divides
  CHECK(default_pq_m(3) == 1);
  for (std::size_t dim : {2u, 7u, 24u, 60u, 100u, 512u})
    CHECK(dim % default_pq_m(dim) == 0);
}

TEST_CASE("encode") {
  VectorSet vs = make_set(2, {1.0f, 2.0f, 5.0f, 6.0f});
  PQConfig cfg{.m = 2, .k_centroids = 2, .train_iters = 10, .seed = 9};
  PQCodebook cb = train_codebook(vs, cfg);

  SUBCASE("training vectors encode losslessly") {
    CHECK(reconstruction_error(vs.row(0), cb) == 0.0);
    CHECK(reconstruction_error(vs.row(1), cb) == 0.0);
  }

  SUBCASE("concatenation of centroids encodes to those indices") {
    std::vector<float> v{static_cast<float>(cb.centroid(0, 1)[0]),
                         static_cast<float>(cb.centroid(1, 0)[0])};
    auto code = encode_one(v, cb);
    CHECK(code[0] == 1);
    CHECK(code[1] == 0);
  }

  SUBCASE("reconstruction error equals the per-slice brute-force minimum") {
    VectorSet train = gaussian_set(50, 8, 23);
    PQConfig c8{.m = 4, .k_centroids = 8, .train_iters = 10, .seed = 5};
    PQCodebook book = train_codebook(train, c8);
    Rng rng(99);
    std::vector<float> v(8);
    for (float& x : v) x = static_cast<float>(rng.normal());
    double expected = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
      double best = 1e300;
      for (std::size_t c = 0; c < 8; ++c) {
        double d0 = static_cast<double>(v[s * 2]) - book.centroid(s, c)[0];
        double d1 = static_cast<double>(v[s * 2 + 1]) - book.centroid(s, c)[1];
        best = std::min(best, d0 * d0 + d1 * d1);
      }
      expected += best;
    }
    CHECK(reconstruction_error(v, book) == doctest::Approx(expected));
  }

  SUBCASE("code storage is exactly m bytes per vector") {
    PQCodes codes = encode(vs, cb);
    CHECK(codes.codes.size() == vs.count() * cb.m);
    static_assert(sizeof(codes.codes[0]) == 1);
  }
}

TEST_CASE("adc_knn hand example") {
  VectorSet vs = make_set(2, {0, 0, 10, 10});
  PQConfig cfg{.m = 2, .k_centroids = 2, .train_iters = 10, .seed = 4};
  PQCodebook cb = train_codebook(vs, cfg);
  PQCodes codes = encode(vs, cb);
  std::vector<float> q{1, 1};
  auto nn = adc_knn(q, codes, cb, 2);
  REQUIRE(nn.size() == 2);
  CHECK(nn[0].id == 0);
  CHECK(nn[0].distance == doctest::Approx(2.0));
  CHECK(nn[1].id == 1);
  CHECK(nn[1].distance == doctest::Approx(162.0));
}

TEST_CASE("adc_knn equals exact_knn under a lossless codebook") {
  // Entries drawn from 4 exactly representable values; with slice width 1 and
  // 4 centroids every slice quantizes with zero error.
  const std::vector<float> values{0.25f, 1.5f, -3.0f, 7.125f};
  Rng rng(31);
  VectorSet vs;
  vs.dim = 8;
  for (int i = 0; i < 50; ++i)
    for (int d = 0; d < 8; ++d)
      vs.data.push_back(values[static_cast<std::size_t>(rng.below(4))]);
  PQConfig cfg{.m = 8, .k_centroids = 4, .train_iters = 10, .seed = 8};
  PQCodebook cb = train_codebook(vs, cfg);
  PQCodes codes = encode(vs, cb);

  for (std::size_t i = 0; i < vs.count(); ++i)
    CHECK(reconstruction_error(vs.row(i), cb) == 0.0);

  std::vector<float> q(8);
  for (int d = 0; d < 8; ++d) q[d] = static_cast<float>(rng.normal());
  auto approx = adc_knn(q, codes, cb, vs.count());
  auto exact = exact_knn(q, vs, vs.count());
  REQUIRE(approx.size() == exact.size());
  for (std::size_t i = 0; i < exact.size(); ++i) {
    CHECK(approx[i].id == exact[i].id);
    CHECK(approx[i].distance ==
          doctest::Approx(exact[i].distance).epsilon(1e-5));
  }
}

TEST_CASE("adc_knn list properties") {
  VectorSet vs = gaussian_set(200, 8, 55);
  PQConfig cfg{.m = 4, .k_centroids = 16, .train_iters = 8, .seed = 2};
  PQCodebook cb = train_codebook(vs, cfg);
  PQCodes codes = encode(vs, cb);
  std::vector<float> q(8, 0.1f);

  SUBCASE("k = count returns a permutation of all ids") {
    auto nn = adc_knn(q, codes, cb, 200);
    std::set<std::size_t> ids;
    for (const Neighbor& n : nn) ids.insert(n.id);
    CHECK(ids.size() == 200);
    for (std::size_t i = 1; i < nn.size(); ++i)
      CHECK(nn[i - 1].distance <= nn[i].distance);
  }

  SUBCASE("growing k preserves the prefix") {
    auto small = adc_knn(q, codes, cb, 5);
    auto large = adc_knn(q, codes, cb, 50);
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == large[i]);
  }
}

TEST_CASE("adc_knn recall against the exact oracle on Gaussian data") {
  VectorSet vs = gaussian_set(1000, 16, 77);
  PQConfig cfg{.m = 4, .k_centroids = 64, .train_iters = 5, .seed = 13};
  PQCodebook cb = train_codebook(vs, cfg);
  PQCodes codes = encode(vs, cb);

  Rng rng(78);
  double recall_sum = 0.0;
  const int queries = 5;
  for (int t = 0; t < queries; ++t) {
    std::vector<float> q(16);
    for (float& x : q) x = static_cast<float>(rng.normal());
    auto approx = adc_knn(q, codes, cb, 10);
    auto exact = exact_knn(q, vs, 10);
    std::set<std::size_t> truth;
    for (const Neighbor& n : exact) truth.insert(n.id);
    int hits = 0;
    for (const Neighbor& n : approx) hits += truth.count(n.id);
    recall_sum += hits / 10.0;
  }
  double recall = recall_sum / queries;
  CHECK(recall >= 0.0);
  CHECK(recall <= 1.0);
  CHECK(recall >= 0.3);  // observed ~0.6+ for this seeded configuration
}

TEST_CASE("vector file round trip") {
  auto tmp = std::filesystem::temp_directory_path() /
             ("locus_vec_" + std::to_string(std::random_device{}()) + ".vec");

  SUBCASE("bit-exact round trip") {
    VectorSet vs = gaussian_set(25, 6, 91);
    write_vec(tmp, vs);
    VectorSet back = read_vec(tmp);
    CHECK(back.dim == vs.dim);
    CHECK(back.data == vs.data);
    std::filesystem::remove(tmp);
  }

  SUBCASE("bad magic rejected") {
    std::ofstream(tmp, std::ios::binary) << "NOPE1234567890";
    CHECK_THROWS_AS(read_vec(tmp), FormatError);
    std::filesystem::remove(tmp);
  }

  SUBCASE("truncated data rejected") {
    VectorSet vs = gaussian_set(4, 4, 5);
    write_vec(tmp, vs);
    auto size = std::filesystem::file_size(tmp);
    std::filesystem::resize_file(tmp, size - 3);
    CHECK_THROWS_AS(read_vec(tmp), FormatError);
    std::filesystem::remove(tmp);
  }

  SUBCASE("missing file names the path") {
    try {
      read_vec("/nonexistent/q.vec");
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/q.vec") !=
            std::string::npos);
    }
  }
}

}  // TEST_SUITE
