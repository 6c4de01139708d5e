#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "locus/geo_localizer.hpp"
#include "locus/vector_index.hpp"

namespace locus::cli {

// Self-contained geo index artifact. It snapshots the indexed records plus
// the indexing configuration; loading rebuilds the in-memory index, which is
// deterministic, so queries against a file reproduce exactly.
struct GixFile {
  bool quantized = false;
  bool normalized = false;  // embeddings were L2-normalized at ingest
  PQConfig pq;              // meaningful when quantized
  std::vector<GeoRecord> records;

  GeoIndex build() const;
  std::string descriptor() const;  // e.g. "exact" or "pq-m4-k256"
};

void write_gix(const std::filesystem::path& path, const GixFile& gix);
GixFile read_gix(const std::filesystem::path& path);

}  // namespace locus::cli
