#include "locus/sampling.hpp"

#include <algorithm>
#include <limits>

#include "locus/errors.hpp"
#include "locus/kmeans.hpp"
#include "locus/rng.hpp"

namespace locus {

GeoKMeansResult kmeans(std::span<const GeoPoint> points, const SamplingConfig& cfg) {
  std::vector<double> flat;
  flat.reserve(points.size() * 2);
  for (const GeoPoint& p : points) {
    flat.push_back(p.lat);
    flat.push_back(p.lon);
  }
  KMeansParams params{cfg.k, cfg.seed, cfg.max_iters, cfg.tol};
  KMeansOutput out = kmeans_flat(flat, 2, params);
  GeoKMeansResult res;
  res.assignment = std::move(out.assignment);
  res.sse_history = std::move(out.sse_history);
  res.centroids.reserve(cfg.k);
  for (std::size_t c = 0; c < cfg.k; ++c)
    res.centroids.push_back(GeoPoint{out.centroids[c * 2], out.centroids[c * 2 + 1]});
  return res;
}

std::vector<std::size_t> sample_spread_indices(std::span<const GeoPoint> points,
                                               const SamplingConfig& cfg) {
  GeoKMeansResult km = kmeans(points, cfg);
  const std::size_t k = cfg.k;
  std::vector<std::size_t> medoid(k, points.size());
  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t c = km.assignment[i];
    const double dlat = points[i].lat - km.centroids[c].lat;
    const double dlon = points[i].lon - km.centroids[c].lon;
    const double d = dlat * dlat + dlon * dlon;
    if (d < best[c]) {
      best[c] = d;
      medoid[c] = i;
    }
  }
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t c = 0; c < k; ++c)
    if (medoid[c] < points.size()) out.push_back(medoid[c]);
  // kmeans guarantees non-empty clusters for k <= n, so this is exactly k.
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GeoPoint> sample_spread(std::span<const GeoPoint> points,
                                    const SamplingConfig& cfg) {
  std::vector<GeoPoint> out;
  for (std::size_t i : sample_spread_indices(points, cfg)) out.push_back(points[i]);
  return out;
}

Partition cell_partition(GridCellId cell, const SplitConfig& cfg) {
  if (!(cfg.cell_deg > 0.0)) throw ValidationError("split: cell_deg must be positive");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw ValidationError("split: train_fraction must lie in (0, 1)");
  std::uint64_t h = splitmix64(cfg.seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(cell.row));
  h = splitmix64(h ^ static_cast<std::uint64_t>(cell.col));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < cfg.train_fraction ? Partition::Train : Partition::Test;
}

std::vector<Partition> grid_split(std::span<const GeoPoint> locations,
                                  const SplitConfig& cfg) {
  std::vector<Partition> out;
  out.reserve(locations.size());
  for (const GeoPoint& p : locations)
    out.push_back(cell_partition(cell_of(p, cfg.cell_deg), cfg));
  return out;
}

}  // namespace locus
