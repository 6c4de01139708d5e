#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "locus/geo.hpp"

namespace locus {

struct OsmNode {
  std::int64_t id = 0;
  GeoPoint location;
};

struct OsmWay {
  std::int64_t id = 0;
  std::vector<std::int64_t> node_refs;
  std::map<std::string, std::string> tags;
};

// Closed ring; the edge from the last vertex back to the first is implicit,
// so the first vertex must not be repeated at the end.
struct Polygon {
  std::vector<GeoPoint> vertices;
};

// Validates the ring invariants (>= 3 vertices, first != last).
Polygon make_polygon(std::vector<GeoPoint> vertices);

// CSV rows `lat,lon`, optional header. A trailing duplicate of the first
// vertex (the explicit-closure convention) is dropped.
Polygon load_polygon_csv(const std::filesystem::path& path);

struct OsmDocument {
  std::vector<OsmNode> nodes;
  std::vector<OsmWay> ways;
};

// Parses the supported OSM XML subset: osm, node[id,lat,lon], way[id],
// nd[ref], tag[k,v]. Unknown elements are ignored. Throws FormatError with
// a line position on malformed XML and on records missing required
// attributes; throws ValidationError on duplicate node ids, out-of-range
// coordinates, or ways without node refs.
OsmDocument parse_osm(const std::string& xml_text);
OsmDocument parse_osm_file(const std::filesystem::path& path);

// Even-odd ray casting on lat/lon treated as planar coordinates. Points
// exactly on an edge or vertex count as inside.
bool point_in_polygon(const GeoPoint& p, const Polygon& poly);

struct ExtractReport {
  std::size_t dangling_refs = 0;
};

// Nodes referenced by at least one way carrying a "highway" tag (any value),
// deduplicated and sorted by ascending node id, optionally restricted to a
// boundary polygon. Dangling refs are skipped and counted in the report.
std::vector<OsmNode> extract_street_node_records(
    std::span<const OsmNode> nodes, std::span<const OsmWay> ways,
    const Polygon* boundary = nullptr, ExtractReport* report = nullptr);

std::vector<GeoPoint> extract_street_nodes(
    std::span<const OsmNode> nodes, std::span<const OsmWay> ways,
    const Polygon* boundary = nullptr, ExtractReport* report = nullptr);

}  // namespace locus
