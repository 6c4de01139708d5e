#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "locus/classifier.hpp"
#include "locus/geo.hpp"

namespace locus::cli {

// lat,lon rows, or id,lat,lon rows as written by osm-extract. An optional
// header line is skipped.
std::vector<GeoPoint> read_points_csv(const std::filesystem::path& path);

// Ready-made binary predictions: header concept,truth,predicted with 0/1
// cells, grouped per concept in first-appearance order.
struct PredictionSet {
  std::vector<std::string> concepts;
  std::vector<std::vector<bool>> truth;      // parallel to concepts
  std::vector<std::vector<bool>> predicted;
};

PredictionSet read_predictions_csv(const std::filesystem::path& path);

// Full-buffer write so failed runs never leave partial output behind.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace locus::cli
