#include "locus/vector_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "locus/errors.hpp"
#include "locus/kmeans.hpp"
#include "locus/rng.hpp"

namespace locus {

namespace {

void check_dataset(const VectorSet& vs) {
  if (vs.dim == 0) throw ValidationError("vector set dim must be positive");
  if (vs.data.size() % vs.dim != 0)
    throw ValidationError("vector data size not a multiple of dim");
  for (float x : vs.data)
    if (!std::isfinite(x))
      throw ValidationError("vector set contains a non-finite value");
}

double sq_dist(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s;
}

void sort_neighbors(std::vector<Neighbor>& out) {
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
}

std::vector<Neighbor> top_k(std::vector<Neighbor> all, std::size_t k) {
  sort_neighbors(all);
  all.resize(k);
  return all;
}

void check_pq_shapes(const PQCodes& codes, const PQCodebook& cb) {
  if (codes.m != cb.m)
    throw ValidationError("code width " + std::to_string(codes.m) +
                          " does not match codebook m " + std::to_string(cb.m));
  if (codes.codes.size() % cb.m != 0)
    throw ValidationError("code buffer size not a multiple of m");
  for (std::uint8_t c : codes.codes)
    if (c >= cb.k_centroids)
      throw ValidationError("code value exceeds centroid count");
}

}  // namespace

std::vector<Neighbor> exact_knn(std::span<const float> query,
                                const VectorSet& dataset, std::size_t k) {
  check_dataset(dataset);
  if (query.size() != dataset.dim)
    throw ValidationError("query dim " + std::to_string(query.size()) +
                          " does not match dataset dim " +
                          std::to_string(dataset.dim));
  if (k == 0 || k > dataset.count())
    throw ValidationError("k must be in [1, dataset size]");

  std::vector<Neighbor> all(dataset.count());
  for (std::size_t i = 0; i < dataset.count(); ++i)
    all[i] = {i, sq_dist(query, dataset.row(i))};
  return top_k(std::move(all), k);
}

std::size_t default_pq_m(std::size_t dim) {
  std::size_t m = std::min<std::size_t>(16, std::max<std::size_t>(1, dim / 4));
  while (m > 1 && dim % m != 0) --m;
  return m;
}

PQCodebook train_codebook(const VectorSet& training, const PQConfig& cfg) {
  check_dataset(training);
  const std::size_t n = training.count();
  if (n == 0) throw ValidationError("codebook needs training vectors");
  if (cfg.m == 0 || training.dim % cfg.m != 0)
    throw ValidationError("m must divide dim (" + std::to_string(cfg.m) +
                          " vs " + std::to_string(training.dim) + ")");
  if (cfg.k_centroids < 2 || cfg.k_centroids > 256)
    throw ValidationError("k_centroids must be in [2, 256]");
  if (cfg.k_centroids > n)
    throw ValidationError("k_centroids " + std::to_string(cfg.k_centroids) +
                          " exceeds training size " + std::to_string(n));
  if (cfg.train_iters == 0)
    throw ValidationError("train_iters must be positive");

  PQCodebook cb;
  cb.dim = training.dim;
  cb.m = cfg.m;
  cb.k_centroids = cfg.k_centroids;
  const std::size_t sd = cb.slice_dim();
  cb.centroids.resize(cfg.m * cfg.k_centroids * sd);

  Rng seeder(cfg.seed);
  std::vector<double> slice(n * sd);
  for (std::size_t s = 0; s < cfg.m; ++s) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < sd; ++d)
        slice[i * sd + d] =
            static_cast<double>(training.data[i * training.dim + s * sd + d]);
    KMeansParams params{.k = cfg.k_centroids,
                        .seed = seeder.next(),
                        .max_iters = cfg.train_iters,
                        .tol = 0.0};
    KMeansOutput out = kmeans_flat(slice, sd, params);
    std::copy(out.centroids.begin(), out.centroids.end(),
              cb.centroids.begin() + s * cfg.k_centroids * sd);
  }
  return cb;
}

std::vector<std::uint8_t> encode_one(std::span<const float> v,
                                     const PQCodebook& cb) {
  if (v.size() != cb.dim)
    throw ValidationError("vector dim does not match codebook dim");
  const std::size_t sd = cb.slice_dim();
  std::vector<std::uint8_t> code(cb.m);
  for (std::size_t s = 0; s < cb.m; ++s) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t c = 0; c < cb.k_centroids; ++c) {
      std::span<const double> cent = cb.centroid(s, c);
      double dist = 0.0;
      for (std::size_t d = 0; d < sd; ++d) {
        double diff = static_cast<double>(v[s * sd + d]) - cent[d];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        best_idx = c;
      }
    }
    code[s] = static_cast<std::uint8_t>(best_idx);
  }
  return code;
}

PQCodes encode(const VectorSet& vectors, const PQCodebook& cb) {
  check_dataset(vectors);
  if (vectors.dim != cb.dim)
    throw ValidationError("vector set dim does not match codebook dim");
  PQCodes out;
  out.m = cb.m;
  out.codes.reserve(vectors.count() * cb.m);
  for (std::size_t i = 0; i < vectors.count(); ++i) {
    auto code = encode_one(vectors.row(i), cb);
    out.codes.insert(out.codes.end(), code.begin(), code.end());
  }
  return out;
}

double reconstruction_error(std::span<const float> v, const PQCodebook& cb) {
  auto code = encode_one(v, cb);
  const std::size_t sd = cb.slice_dim();
  double err = 0.0;
  for (std::size_t s = 0; s < cb.m; ++s) {
    std::span<const double> cent = cb.centroid(s, code[s]);
    for (std::size_t d = 0; d < sd; ++d) {
      double diff = static_cast<double>(v[s * sd + d]) - cent[d];
      err += diff * diff;
    }
  }
  return err;
}

std::vector<Neighbor> adc_knn(std::span<const float> query,
                              const PQCodes& codes, const PQCodebook& cb,
                              std::size_t k) {
  if (query.size() != cb.dim)
    throw ValidationError("query dim does not match codebook dim");
  check_pq_shapes(codes, cb);
  const std::size_t n = codes.count();
  if (k == 0 || k > n) throw ValidationError("k must be in [1, code count]");

  const std::size_t sd = cb.slice_dim();
  std::vector<double> table(cb.m * cb.k_centroids);
  for (std::size_t s = 0; s < cb.m; ++s)
    for (std::size_t c = 0; c < cb.k_centroids; ++c) {
      std::span<const double> cent = cb.centroid(s, c);
      double dist = 0.0;
      for (std::size_t d = 0; d < sd; ++d) {
        double diff = static_cast<double>(query[s * sd + d]) - cent[d];
        dist += diff * diff;
      }
      table[s * cb.k_centroids + c] = dist;
    }

  std::vector<Neighbor> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const std::uint8_t> code = codes.code(i);
    double dist = 0.0;
    for (std::size_t s = 0; s < cb.m; ++s)
      dist += table[s * cb.k_centroids + code[s]];
    all[i] = {i, dist};
  }
  return top_k(std::move(all), k);
}

namespace {

constexpr char kVecMagic[4] = {'V', 'E', 'C', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_vec(const std::filesystem::path& path, const VectorSet& vs) {
  check_dataset(vs);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ValidationError("cannot open for writing: " + path.string());
  out.write(kVecMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(vs.dim));
  put_u64(out, vs.count());
  for (float x : vs.data) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(x);
    put_u32(out, bits);
  }
  if (!out) throw ValidationError("write failed: " + path.string());
}

VectorSet read_vec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open vector file: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kVecMagic, 4) != 0)
    throw FormatError("bad magic in vector file: " + path.string());
  VectorSet vs;
  vs.dim = get_u32(in);
  std::uint64_t count = get_u64(in);
  if (!in) throw FormatError("truncated vector file header: " + path.string());
  if (vs.dim == 0) throw ValidationError("vector file declares dim 0");
  vs.data.resize(static_cast<std::size_t>(count) * vs.dim);
  for (float& x : vs.data) {
    std::uint32_t bits = get_u32(in);
    if (!in)
      throw FormatError("truncated vector data: " + path.string());
    x = std::bit_cast<float>(bits);
  }
  char extra;
  if (in.read(&extra, 1))
    throw FormatError("trailing bytes after vector data: " + path.string());
  check_dataset(vs);
  return vs;
}

}  // namespace locus
