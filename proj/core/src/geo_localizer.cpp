#include "locus/geo_localizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "locus/errors.hpp"
#include "locus/rng.hpp"

namespace locus {

namespace {

using nlohmann::json;

constexpr double kKmPerDegree = std::numbers::pi * kEarthRadiusKm / 180.0;

std::vector<GeoRecord> prepare_records(std::vector<GeoRecord> records) {
  if (records.empty())
    throw ValidationError("index needs at least one record");
  std::sort(records.begin(), records.end(),
            [](const GeoRecord& a, const GeoRecord& b) { return a.id < b.id; });
  const std::size_t dim = records.front().embedding.size();
  if (dim == 0) throw ValidationError("records need embeddings to be indexed");
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].embedding.size() != dim)
      throw ValidationError("record " + std::to_string(records[i].id) +
                            " has embedding dim " +
                            std::to_string(records[i].embedding.size()) +
                            ", expected " + std::to_string(dim));
    if (i > 0 && records[i].id == records[i - 1].id)
      throw ValidationError("duplicate record id " +
                            std::to_string(records[i].id));
  }
  return records;
}

VectorSet to_vector_set(const std::vector<GeoRecord>& records) {
  VectorSet vs;
  vs.dim = records.front().embedding.size();
  vs.data.reserve(records.size() * vs.dim);
  for (const GeoRecord& r : records)
    vs.data.insert(vs.data.end(), r.embedding.begin(), r.embedding.end());
  return vs;
}

}  // namespace

GeoIndex GeoIndex::build_exact(std::vector<GeoRecord> records) {
  GeoIndex idx;
  idx.records_ = prepare_records(std::move(records));
  idx.vectors_ = to_vector_set(idx.records_);
  return idx;
}

GeoIndex GeoIndex::build_pq(std::vector<GeoRecord> records, PQConfig cfg) {
  GeoIndex idx;
  idx.records_ = prepare_records(std::move(records));
  idx.vectors_ = to_vector_set(idx.records_);
  if (cfg.m == 0) cfg.m = default_pq_m(idx.vectors_.dim);
  idx.codebook_ = train_codebook(idx.vectors_, cfg);
  idx.codes_ = encode(idx.vectors_, idx.codebook_);
  idx.quantized_ = true;
  return idx;
}

std::vector<Neighbor> GeoIndex::search(std::span<const float> query,
                                       std::size_t k) const {
  if (quantized_) return adc_knn(query, codes_, codebook_, k);
  return exact_knn(query, vectors_, k);
}

GeoEstimate localize(std::span<const float> query, const GeoIndex& index,
                     std::size_t nn) {
  if (nn == 0 || nn > index.size())
    throw ValidationError("nn must be in [1, index size]");
  GeoEstimate est;
  est.neighbors = index.search(query, nn);
  std::vector<GeoPoint> locs;
  locs.reserve(est.neighbors.size());
  for (const Neighbor& n : est.neighbors)
    locs.push_back(index.record(n.id).location);
  est.predicted = spherical_mean(locs);
  return est;
}

EvalReport evaluate(std::span<const GeoRecord> queries, const GeoIndex& index,
                    std::span<const std::size_t> nn_choices) {
  if (queries.empty()) throw ValidationError("query set is empty");
  if (nn_choices.empty()) throw ValidationError("nn_choices is empty");
  for (std::size_t nn : nn_choices)
    if (nn == 0 || nn > index.size())
      throw ValidationError("nn choice " + std::to_string(nn) +
                            " out of range for index of size " +
                            std::to_string(index.size()));

  EvalReport report;
  std::set<std::int64_t> index_ids;
  for (const GeoRecord& r : index.records()) index_ids.insert(r.id);
  for (const GeoRecord& q : queries)
    if (index_ids.contains(q.id)) ++report.overlapping_ids;

  for (std::size_t nn : nn_choices) {
    std::vector<double> errors;
    errors.reserve(queries.size());
    for (const GeoRecord& q : queries) {
      GeoEstimate est = localize(q.embedding, index, nn);
      errors.push_back(haversine_km(est.predicted, q.location));
    }
    // Sorted summation keeps the mean identical under query permutations.
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    std::size_t in1 = 0, in25 = 0, in200 = 0;
    for (double e : sorted) {
      sum += e;
      if (e < 1.0) ++in1;
      if (e < 25.0) ++in25;
      if (e < 200.0) ++in200;
    }
    const double n = static_cast<double>(queries.size());
    EvalRow row{nn, sum / n, in1 / n, in25 / n, in200 / n};
    if (row.acc_1km > row.acc_25km || row.acc_25km > row.acc_200km)
      throw InternalError("accuracy radii are not monotone");
    report.rows.push_back(row);
  }
  return report;
}

std::string eval_report_csv(const EvalReport& report,
                            const std::string& descriptor_tag) {
  std::ostringstream out;
  out << "descriptor,nn,mean_error_km,acc_1km,acc_25km,acc_200km\n";
  for (const EvalRow& r : report.rows) {
    out << descriptor_tag << ',' << r.nn;
    char buf[64];
    for (double v : {r.mean_error_km, r.acc_1km, r.acc_25km, r.acc_200km}) {
      std::snprintf(buf, sizeof buf, ",%.6g", v);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<GeoRecord> synth_dataset(std::span<const CitySpec> cities,
                                     std::size_t embed_dim, double spread_km,
                                     double embed_noise, std::uint64_t seed) {
  if (embed_dim == 0) throw ValidationError("embed_dim must be positive");
  if (embed_dim < cities.size())
    throw ValidationError("embed_dim must be at least the city count");
  if (spread_km < 0 || !std::isfinite(spread_km))
    throw ValidationError("spread_km must be non-negative");
  if (embed_noise < 0 || !std::isfinite(embed_noise))
    throw ValidationError("embed_noise must be non-negative");

  const double spread_deg = spread_km / kKmPerDegree;
  Rng rng(seed);
  std::vector<GeoRecord> out;
  std::int64_t next_id = 0;
  for (std::size_t c = 0; c < cities.size(); ++c) {
    const CitySpec& city = cities[c];
    for (std::size_t i = 0; i < city.n; ++i) {
      GeoRecord rec;
      rec.id = next_id++;
      rec.label = city.name;
      rec.location = make_point(city.center.lat + spread_deg * rng.normal(),
                                city.center.lon + spread_deg * rng.normal());
      rec.embedding.assign(embed_dim, 0.0f);
      rec.embedding[c] = 1.0f;
      if (embed_noise > 0)
        for (float& x : rec.embedding)
          x += static_cast<float>(embed_noise * rng.normal());
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<GeoRecord> read_georecords_jsonl(const std::filesystem::path& path,
                                             const VectorSet* vectors) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset: " + path.string());
  std::vector<GeoRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
    std::string ctx = path.string() + ":" + std::to_string(line_no);
    try {
      GeoRecord rec;
      rec.id = obj.at("id").get<std::int64_t>();
      rec.location = make_point(obj.at("lat").get<double>(),
                                obj.at("lon").get<double>());
      if (obj.contains("label")) rec.label = obj["label"].get<std::string>();
      if (obj.contains("embedding")) {
        for (const auto& v : obj["embedding"])
          rec.embedding.push_back(v.get<float>());
      } else if (obj.contains("vec_row")) {
        if (!vectors)
          throw ValidationError(ctx + ": vec_row given but no vector file");
        std::size_t row = obj["vec_row"].get<std::size_t>();
        if (row >= vectors->count())
          throw ValidationError(ctx + ": vec_row " + std::to_string(row) +
                                " out of range");
        auto r = vectors->row(row);
        rec.embedding.assign(r.begin(), r.end());
      }
      out.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw FormatError(ctx + ": " + e.what());
    }
  }
  return out;
}

void write_georecords_jsonl(const std::filesystem::path& path,
                            std::span<const GeoRecord> records) {
  std::ostringstream buf;
  for (const GeoRecord& r : records) {
    json obj;
    obj["id"] = r.id;
    obj["lat"] = r.location.lat;
    obj["lon"] = r.location.lon;
    if (!r.label.empty()) obj["label"] = r.label;
    if (!r.embedding.empty()) obj["embedding"] = r.embedding;
    buf << obj.dump() << '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out << buf.str();
  if (!out) throw ValidationError("write failed: " + path.string());
}

}  // namespace locus
