#include "gix.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "locus/errors.hpp"

namespace locus::cli {

namespace {

constexpr char kMagic[4] = {'G', 'I', 'X', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

GeoIndex GixFile::build() const {
  if (quantized) return GeoIndex::build_pq(records, pq);
  return GeoIndex::build_exact(records);
}

std::string GixFile::descriptor() const {
  if (!quantized) return "exact";
  return "pq-m" + std::to_string(pq.m) + "-k" + std::to_string(pq.k_centroids);
}

void write_gix(const std::filesystem::path& path, const GixFile& gix) {
  if (gix.records.empty()) throw ValidationError("refusing to write an empty index");
  const std::size_t dim = gix.records.front().embedding.size();

  std::ostringstream out(std::ios::binary);
  out.write(kMagic, 4);
  out.put(gix.quantized ? 1 : 0);
  out.put(gix.normalized ? 1 : 0);
  put_u32(out, static_cast<std::uint32_t>(gix.pq.m));
  put_u32(out, static_cast<std::uint32_t>(gix.pq.k_centroids));
  put_u32(out, static_cast<std::uint32_t>(gix.pq.train_iters));
  put_u64(out, gix.pq.seed);
  put_u64(out, gix.records.size());
  put_u32(out, static_cast<std::uint32_t>(dim));
  for (const GeoRecord& r : gix.records) {
    if (r.embedding.size() != dim)
      throw ValidationError("record embedding dims differ");
    put_u64(out, static_cast<std::uint64_t>(r.id));
    put_f64(out, r.location.lat);
    put_f64(out, r.location.lon);
    put_u32(out, static_cast<std::uint32_t>(r.label.size()));
    out.write(r.label.data(), static_cast<std::streamsize>(r.label.size()));
    for (float x : r.embedding) put_u32(out, std::bit_cast<std::uint32_t>(x));
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot open for writing: " + path.string());
  const std::string bytes = out.str();
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw ValidationError("write failed: " + path.string());
}

GixFile read_gix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open index file: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad magic in index file: " + path.string());

  GixFile gix;
  int quantized = in.get();
  int normalized = in.get();
  if (quantized < 0 || quantized > 1 || normalized < 0 || normalized > 1)
    throw FormatError("bad mode byte in index file: " + path.string());
  gix.quantized = quantized == 1;
  gix.normalized = normalized == 1;
  gix.pq.m = get_u32(in);
  gix.pq.k_centroids = get_u32(in);
  gix.pq.train_iters = get_u32(in);
  gix.pq.seed = get_u64(in);
  std::uint64_t count = get_u64(in);
  std::uint32_t dim = get_u32(in);
  if (!in) throw FormatError("truncated index header: " + path.string());
  if (count == 0) throw ValidationError("index file holds no records");
  if (dim == 0) throw ValidationError("index file declares dim 0");

  gix.records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    GeoRecord r;
    r.id = static_cast<std::int64_t>(get_u64(in));
    r.location.lat = get_f64(in);
    r.location.lon = get_f64(in);
    std::uint32_t label_len = get_u32(in);
    if (!in) throw FormatError("truncated index record: " + path.string());
    r.label.resize(label_len);
    in.read(r.label.data(), label_len);
    r.embedding.resize(dim);
    for (float& x : r.embedding) x = std::bit_cast<float>(get_u32(in));
    if (!in) throw FormatError("truncated index record: " + path.string());
    gix.records.push_back(std::move(r));
  }
  char extra;
  if (in.read(&extra, 1))
    throw FormatError("trailing bytes in index file: " + path.string());
  return gix;
}

}  // namespace locus::cli
