#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace locus {

// Row-major matrix of 32-bit float embeddings; ids are 0-based row positions.
struct VectorSet {
  std::size_t dim = 0;
  std::vector<float> data;

  std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> row(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
};

struct Neighbor {
  std::size_t id = 0;
  double distance = 0.0;  // squared Euclidean
  bool operator==(const Neighbor&) const = default;
};

// True k smallest squared distances, ascending, ties by ascending id.
std::vector<Neighbor> exact_knn(std::span<const float> query,
                                const VectorSet& dataset, std::size_t k);

struct PQConfig {
  std::size_t m = 0;  // subspace count; must divide dim
  std::size_t k_centroids = 256;
  std::size_t train_iters = 25;
  std::uint64_t seed = 0;
};

// Largest m <= min(16, dim/4) that divides dim, at least 1.
std::size_t default_pq_m(std::size_t dim);

struct PQCodebook {
  std::size_t dim = 0;
  std::size_t m = 0;
  std::size_t k_centroids = 0;
  // m tables of k_centroids rows of slice_dim values each, concatenated.
  std::vector<double> centroids;

  std::size_t slice_dim() const { return dim / m; }
  std::span<const double> centroid(std::size_t subspace, std::size_t idx) const {
    std::size_t sd = slice_dim();
    return {centroids.data() + (subspace * k_centroids + idx) * sd, sd};
  }
};

// One byte per subspace per vector (k_centroids is capped at 256).
struct PQCodes {
  std::size_t m = 0;
  std::vector<std::uint8_t> codes;

  std::size_t count() const { return m == 0 ? 0 : codes.size() / m; }
  std::span<const std::uint8_t> code(std::size_t i) const {
    return {codes.data() + i * m, m};
  }
};

// Seeded per-slice K-Means over the m coordinate slices.
PQCodebook train_codebook(const VectorSet& training, const PQConfig& cfg);

// Per subspace, the index of the nearest centroid (ties to the lowest index).
std::vector<std::uint8_t> encode_one(std::span<const float> v,
                                     const PQCodebook& cb);
PQCodes encode(const VectorSet& vectors, const PQCodebook& cb);

// Squared distance between v and its codebook reconstruction.
double reconstruction_error(std::span<const float> v, const PQCodebook& cb);

// Asymmetric distance search: one table of squared distances from each query
// slice to every centroid, then m lookups per stored code.
std::vector<Neighbor> adc_knn(std::span<const float> query,
                              const PQCodes& codes, const PQCodebook& cb,
                              std::size_t k);

// Binary vector file: magic "VEC1", little-endian u32 dim, u64 count, then
// count*dim little-endian 32-bit floats.
void write_vec(const std::filesystem::path& path, const VectorSet& vs);
VectorSet read_vec(const std::filesystem::path& path);

}  // namespace locus
