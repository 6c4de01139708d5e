#include "locus/osm.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "locus/errors.hpp"

namespace locus {

namespace {

namespace pt = boost::property_tree;

std::optional<std::string> attr(const pt::ptree& elem, const char* name) {
  auto attrs = elem.get_child_optional("<xmlattr>");
  if (!attrs) return std::nullopt;
  auto v = attrs->get_optional<std::string>(name);
  if (!v) return std::nullopt;
  return *v;
}

std::int64_t parse_id(const std::string& text, const std::string& context) {
  std::int64_t id = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw FormatError(context + ": bad integer '" + text + "'");
  return id;
}

double parse_coord(const std::string& text, const std::string& context) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw FormatError(context + ": bad coordinate '" + text + "'");
  }
}

OsmNode parse_node(const pt::ptree& elem) {
  auto id_text = attr(elem, "id");
  if (!id_text) throw FormatError("node element missing id attribute");
  std::int64_t id = parse_id(*id_text, "node");
  auto lat = attr(elem, "lat");
  auto lon = attr(elem, "lon");
  if (!lat || !lon)
    throw FormatError("node " + std::to_string(id) +
                      " missing lat/lon attribute");
  std::string ctx = "node " + std::to_string(id);
  return OsmNode{id, make_point(parse_coord(*lat, ctx), parse_coord(*lon, ctx))};
}

OsmWay parse_way(const pt::ptree& elem) {
  auto id_text = attr(elem, "id");
  if (!id_text) throw FormatError("way element missing id attribute");
  OsmWay way;
  way.id = parse_id(*id_text, "way");
  for (const auto& [key, child] : elem) {
    if (key == "nd") {
      auto ref = attr(child, "ref");
      if (!ref)
        throw FormatError("way " + std::to_string(way.id) +
                          ": nd element missing ref attribute");
      way.node_refs.push_back(parse_id(*ref, "way " + std::to_string(way.id)));
    } else if (key == "tag") {
      auto k = attr(child, "k");
      auto v = attr(child, "v");
      if (!k || !v)
        throw FormatError("way " + std::to_string(way.id) +
                          ": tag element missing k/v attribute");
      way.tags[*k] = *v;
    }
  }
  if (way.node_refs.empty())
    throw ValidationError("way " + std::to_string(way.id) +
                          " has no node refs");
  return way;
}

// Exact on-segment test; the "on edge counts as inside" rule applies to
// points exactly on the boundary, so no tolerance is involved.
bool on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  double cross =
      (b.lat - a.lat) * (p.lon - a.lon) - (b.lon - a.lon) * (p.lat - a.lat);
  if (cross != 0.0) return false;
  return std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat) &&
         std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon);
}

}  // namespace

Polygon make_polygon(std::vector<GeoPoint> vertices) {
  if (vertices.size() < 3)
    throw ValidationError("polygon needs at least 3 vertices, got " +
                          std::to_string(vertices.size()));
  if (vertices.front() == vertices.back())
    throw ValidationError("polygon ring must not repeat its first vertex");
  return Polygon{std::move(vertices)};
}

Polygon load_polygon_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open polygon file: " + path.string());
  std::vector<GeoPoint> verts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.find_first_of("0123456789") == std::string::npos)
      continue;  // header row
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected `lat,lon`");
    std::string ctx = path.string() + ":" + std::to_string(line_no);
    double lat = parse_coord(line.substr(0, comma), ctx);
    double lon = parse_coord(line.substr(comma + 1), ctx);
    verts.push_back(make_point(lat, lon));
  }
  if (verts.size() >= 2 && verts.front() == verts.back()) verts.pop_back();
  return make_polygon(std::move(verts));
}

OsmDocument parse_osm(const std::string& xml_text) {
  pt::ptree tree;
  std::istringstream in(xml_text);
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw FormatError("xml parse error at line " + std::to_string(e.line()) +
                      ": " + e.message());
  }
  auto root = tree.get_child_optional("osm");
  if (!root) throw FormatError("missing <osm> root element");

  OsmDocument doc;
  for (const auto& [key, child] : *root) {
    if (key == "node")
      doc.nodes.push_back(parse_node(child));
    else if (key == "way")
      doc.ways.push_back(parse_way(child));
    // any other element: ignored
  }

  std::set<std::int64_t> ids;
  for (const OsmNode& n : doc.nodes)
    if (!ids.insert(n.id).second)
      throw ValidationError("duplicate node id " + std::to_string(n.id));
  return doc;
}

OsmDocument parse_osm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open osm file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_osm(buf.str());
}

bool point_in_polygon(const GeoPoint& p, const Polygon& poly) {
  const auto& v = poly.vertices;
  if (v.size() < 3)
    throw ValidationError("polygon needs at least 3 vertices, got " +
                          std::to_string(v.size()));
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if (on_segment(p, v[j], v[i])) return true;
    bool straddles = (v[i].lat > p.lat) != (v[j].lat > p.lat);
    if (straddles) {
      double x = v[i].lon + (p.lat - v[i].lat) / (v[j].lat - v[i].lat) *
                                (v[j].lon - v[i].lon);
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

std::vector<OsmNode> extract_street_node_records(
    std::span<const OsmNode> nodes, std::span<const OsmWay> ways,
    const Polygon* boundary, ExtractReport* report) {
  std::map<std::int64_t, const OsmNode*> by_id;
  for (const OsmNode& n : nodes) by_id.emplace(n.id, &n);

  std::set<std::int64_t> picked;
  for (const OsmWay& way : ways) {
    if (!way.tags.contains("highway")) continue;
    for (std::int64_t ref : way.node_refs) {
      if (by_id.contains(ref)) {
        picked.insert(ref);
      } else if (report) {
        ++report->dangling_refs;
      }
    }
  }

  std::vector<OsmNode> out;
  for (std::int64_t id : picked) {
    const OsmNode& node = *by_id.at(id);
    if (boundary && !point_in_polygon(node.location, *boundary)) continue;
    out.push_back(node);
  }
  return out;
}

std::vector<GeoPoint> extract_street_nodes(std::span<const OsmNode> nodes,
                                           std::span<const OsmWay> ways,
                                           const Polygon* boundary,
                                           ExtractReport* report) {
  std::vector<GeoPoint> out;
  for (const OsmNode& n :
       extract_street_node_records(nodes, ways, boundary, report))
    out.push_back(n.location);
  return out;
}

}  // namespace locus
