#include "locus/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "locus/errors.hpp"
#include "locus/rng.hpp"

namespace locus {

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Indices of the first occurrence of each distinct row value, input order.
std::vector<std::size_t> distinct_rows(std::span<const double> data,
                                       std::size_t dim, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(
        data.data() + a * dim, data.data() + (a + 1) * dim,
        data.data() + b * dim, data.data() + (b + 1) * dim);
  });
  std::vector<std::size_t> uniq;
  for (std::size_t i = 0; i < n; ++i) {
    if (!uniq.empty() &&
        std::equal(data.data() + order[i] * dim, data.data() + (order[i] + 1) * dim,
                   data.data() + uniq.back() * dim))
      continue;
    uniq.push_back(order[i]);
  }
  // Restore first-occurrence positions so the seeded shuffle sees a stable order.
  std::sort(uniq.begin(), uniq.end());
  return uniq;
}

}  // namespace

KMeansOutput kmeans_flat(std::span<const double> data, std::size_t dim,
                         const KMeansParams& params) {
  if (dim == 0) throw ValidationError("kmeans: dim must be positive");
  if (data.size() % dim != 0)
    throw ValidationError("kmeans: data size not a multiple of dim");
  const std::size_t n = data.size() / dim;
  const std::size_t k = params.k;
  if (n == 0) throw ValidationError("kmeans: empty input");
  if (k == 0) throw ValidationError("kmeans: k must be >= 1");
  if (k > n) throw ValidationError("kmeans: k exceeds number of points");
  if (params.max_iters < 1)
    throw ValidationError("kmeans: max_iters must be positive");
  if (params.tol < 0) throw ValidationError("kmeans: tol must be >= 0");

  KMeansOutput out;
  out.centroids.assign(k * dim, 0.0);
  out.assignment.assign(n, 0);

  // Seeded init from distinct point values; repeats only when fewer than k
  // distinct values exist (their clusters are refilled by the repair step).
  {
    std::vector<std::size_t> uniq = distinct_rows(data, dim, n);
    Rng rng(params.seed);
    shuffle(uniq, rng);
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t src = uniq[c % uniq.size()];
      std::copy_n(data.data() + src * dim, dim, out.centroids.data() + c * dim);
    }
  }

  std::vector<double> dist_to_centroid(n, 0.0);
  std::vector<std::size_t> counts(k, 0);
  std::vector<double> next(k * dim, 0.0);

  auto assign_all = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(data.data() + i * dim, out.centroids.data() + c * dim, dim);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      out.assignment[i] = best_c;
      dist_to_centroid[i] = best;
    }
  };

  // Move one point into each empty cluster: the point farthest from its
  // centroid, considering only donors from clusters with >= 2 members.
  auto repair_empty = [&]() {
    counts.assign(k, 0);
    for (std::size_t i = 0; i < n; ++i) counts[out.assignment[i]]++;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      double far_d = -1.0;
      std::size_t far_i = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[out.assignment[i]] < 2) continue;
        if (dist_to_centroid[i] > far_d) {
          far_d = dist_to_centroid[i];
          far_i = i;
        }
      }
      if (far_i == n) continue;  // k > distinct points and all singleton
      counts[out.assignment[far_i]]--;
      out.assignment[far_i] = c;
      counts[c] = 1;
      dist_to_centroid[far_i] = 0.0;
      std::copy_n(data.data() + far_i * dim, dim, out.centroids.data() + c * dim);
    }
  };

  auto update_centroids = [&]() {
    next.assign(k * dim, 0.0);
    counts.assign(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = out.assignment[i];
      counts[c]++;
      for (std::size_t d = 0; d < dim; ++d)
        next[c * dim + d] += data[i * dim + d];
    }
    double max_shift_sq = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // keeps previous centroid
      for (std::size_t d = 0; d < dim; ++d)
        next[c * dim + d] /= static_cast<double>(counts[c]);
      max_shift_sq = std::max(
          max_shift_sq, sq_dist(next.data() + c * dim, out.centroids.data() + c * dim, dim));
      std::copy_n(next.data() + c * dim, dim, out.centroids.data() + c * dim);
    }
    return std::sqrt(max_shift_sq);
  };

  for (int iter = 0; iter < params.max_iters; ++iter) {
    assign_all();
    repair_empty();
    const double shift = update_centroids();
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sse += sq_dist(data.data() + i * dim,
                     out.centroids.data() + out.assignment[i] * dim, dim);
    out.sse_history.push_back(sse);
    if (shift < params.tol) break;
  }

  // Final pass so assignments match the returned centroids, with every
  // cluster non-empty.
  assign_all();
  repair_empty();
  return out;
}

}  // namespace locus
