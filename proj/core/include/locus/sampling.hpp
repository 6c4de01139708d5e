#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "locus/geo.hpp"

namespace locus {

struct SamplingConfig {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-7;  // centroid-shift stop threshold, degrees
};

struct GeoKMeansResult {
  std::vector<std::size_t> assignment;  // point index -> cluster
  std::vector<GeoPoint> centroids;
  std::vector<double> sse_history;
};

// Lloyd's algorithm on (lat, lon) treated as 2D Euclidean. At city scale the
// metric distortion of raw degrees is accepted.
GeoKMeansResult kmeans(std::span<const GeoPoint> points, const SamplingConfig& cfg);

// Indices of one medoid per cluster (member nearest its centroid, ties to the
// lowest input index), ascending. Exactly cfg.k entries.
std::vector<std::size_t> sample_spread_indices(std::span<const GeoPoint> points,
                                               const SamplingConfig& cfg);

// The medoid points themselves, ordered by input index.
std::vector<GeoPoint> sample_spread(std::span<const GeoPoint> points,
                                    const SamplingConfig& cfg);

enum class Partition : std::uint8_t { Train, Test };

struct SplitConfig {
  double cell_deg = 0.01;      // ~1.1 km of latitude per cell
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

// Assignment of a whole grid cell, by seeded stable hash. Records never flip
// when other records are added.
Partition cell_partition(GridCellId cell, const SplitConfig& cfg);

// Per-record partitions: every record inherits its cell's assignment, so no
// cell ever straddles the train/test boundary.
std::vector<Partition> grid_split(std::span<const GeoPoint> locations,
                                  const SplitConfig& cfg);

}  // namespace locus
