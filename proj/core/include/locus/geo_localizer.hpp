#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "locus/geo.hpp"
#include "locus/vector_index.hpp"

namespace locus {

struct GeoRecord {
  std::int64_t id = 0;
  GeoPoint location;
  std::vector<float> embedding;
  std::string label;  // city name; empty when unlabeled
};

struct GeoEstimate {
  GeoPoint predicted;
  std::vector<Neighbor> neighbors;  // ids are positions into index records
};

// Immutable search index over geo records, exact or product-quantized.
// Records are stored sorted by ascending record id, so neighbor positions
// and record ids sort identically.
class GeoIndex {
 public:
  static GeoIndex build_exact(std::vector<GeoRecord> records);
  static GeoIndex build_pq(std::vector<GeoRecord> records, PQConfig cfg);

  std::size_t size() const { return records_.size(); }
  std::size_t dim() const { return vectors_.dim; }
  bool quantized() const { return quantized_; }
  const GeoRecord& record(std::size_t pos) const { return records_[pos]; }
  const std::vector<GeoRecord>& records() const { return records_; }

  std::vector<Neighbor> search(std::span<const float> query,
                               std::size_t k) const;

 private:
  std::vector<GeoRecord> records_;
  VectorSet vectors_;
  bool quantized_ = false;
  PQCodebook codebook_;
  PQCodes codes_;
};

// Spherical mean of the top-nn neighbor locations.
GeoEstimate localize(std::span<const float> query, const GeoIndex& index,
                     std::size_t nn);

struct EvalRow {
  std::size_t nn = 0;
  double mean_error_km = 0.0;
  double acc_1km = 0.0;
  double acc_25km = 0.0;
  double acc_200km = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;          // one per nn choice, input order
  std::size_t overlapping_ids = 0;    // queries sharing an id with the index
};

inline const std::vector<std::size_t> kDefaultNnChoices{1, 5, 9};

// Mean haversine error and accuracy under 1/25/200 km (strict <) for each
// nn choice. Queries carry ground-truth locations. The aggregation is
// permutation-invariant in the query order.
EvalReport evaluate(std::span<const GeoRecord> queries, const GeoIndex& index,
                    std::span<const std::size_t> nn_choices);

// One CSV row per nn: descriptor,nn,mean_error_km,acc_1km,acc_25km,acc_200km.
std::string eval_report_csv(const EvalReport& report,
                            const std::string& descriptor_tag);

struct CitySpec {
  std::string name;
  GeoPoint center;
  std::size_t n = 0;
};

// Synthetic benchmark data: per city, locations Gaussian around the center
// (std = spread_km in degrees of arc) and embeddings on a fixed per-city
// axis direction plus Gaussian noise. Requires embed_dim >= city count so
// the directions stay orthogonal.
std::vector<GeoRecord> synth_dataset(std::span<const CitySpec> cities,
                                     std::size_t embed_dim, double spread_km,
                                     double embed_noise, std::uint64_t seed);

// JSON-lines dataset: objects with id, lat, lon, optional label, and either
// an inline `embedding` array or a `vec_row` index into a VEC1 vector set
// (pass that set as `vectors`).
std::vector<GeoRecord> read_georecords_jsonl(const std::filesystem::path& path,
                                             const VectorSet* vectors = nullptr);
void write_georecords_jsonl(const std::filesystem::path& path,
                            std::span<const GeoRecord> records);

}  // namespace locus
