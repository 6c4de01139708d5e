#include "table_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "locus/errors.hpp"

namespace locus::cli {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  return cells;
}

double parse_real(const std::string& cell, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw FormatError(ctx + ": not a number: '" + cell + "'");
  }
}

bool looks_numeric(const std::string& cell) {
  try {
    std::size_t pos = 0;
    std::stod(cell, &pos);
    return pos == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_bool(const std::string& cell, const std::string& ctx) {
  if (cell == "0" || cell == "false") return false;
  if (cell == "1" || cell == "true") return true;
  throw FormatError(ctx + ": expected 0/1/true/false, got '" + cell + "'");
}

}  // namespace

std::vector<GeoPoint> read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open points file: " + path.string());
  std::vector<GeoPoint> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    auto cells = split_csv(line);
    std::string ctx = path.string() + ":" + std::to_string(line_no);
    if (points.empty() && line_no == 1 && !cells.empty() &&
        !looks_numeric(cells[0]))
      continue;  // header
    if (cells.size() == 2) {
      points.push_back(
          make_point(parse_real(cells[0], ctx), parse_real(cells[1], ctx)));
    } else if (cells.size() == 3) {
      parse_real(cells[0], ctx);  // id column, unused here
      points.push_back(
          make_point(parse_real(cells[1], ctx), parse_real(cells[2], ctx)));
    } else {
      throw FormatError(ctx + ": expected lat,lon or id,lat,lon");
    }
  }
  if (points.empty())
    throw ValidationError("no points in " + path.string());
  return points;
}

PredictionSet read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open predictions file: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("empty predictions file: " + path.string());
  {
    auto header = split_csv(line);
    if (header != std::vector<std::string>{"concept", "truth", "predicted"})
      throw FormatError(path.string() +
                        ": header must be concept,truth,predicted");
  }

  PredictionSet set;
  std::map<std::string, std::size_t> slot;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    auto cells = split_csv(line);
    std::string ctx = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 3)
      throw FormatError(ctx + ": expected concept,truth,predicted");
    auto [it, fresh] = slot.emplace(cells[0], set.concepts.size());
    if (fresh) {
      set.concepts.push_back(cells[0]);
      set.truth.emplace_back();
      set.predicted.emplace_back();
    }
    set.truth[it->second].push_back(parse_bool(cells[1], ctx));
    set.predicted[it->second].push_back(parse_bool(cells[2], ctx));
  }
  if (set.concepts.empty())
    throw ValidationError("no prediction rows in " + path.string());
  return set;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ValidationError("write failed: " + path.string());
}

}  // namespace locus::cli
