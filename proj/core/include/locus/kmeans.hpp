#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace locus {

struct KMeansParams {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-7;  // stop when the largest centroid shift falls below
};

struct KMeansOutput {
  std::vector<double> centroids;        // k * dim, row-major
  std::vector<std::size_t> assignment;  // one cluster index per point
  std::vector<double> sse_history;      // within-cluster SSE after each iteration
};

// Seeded Lloyd's algorithm on row-major flat data. Initialization samples k
// distinct point values (first-occurrence order, seeded shuffle); when fewer
// distinct values exist the remainder repeats. Empty clusters are re-seeded
// each iteration with the point farthest from its current centroid, and every
// cluster is non-empty on return whenever k <= n. Fully deterministic per
// seed: fixed iteration order, ties to the lowest index.
KMeansOutput kmeans_flat(std::span<const double> data, std::size_t dim,
                         const KMeansParams& params);

}  // namespace locus
