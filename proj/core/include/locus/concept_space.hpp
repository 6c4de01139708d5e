#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace locus {

// Single-rooted concept tree. Depth counts nodes from the root inclusive,
// so depth(root) = 1.
class Taxonomy {
 public:
  // (child, parent) rows; exactly one row has an empty parent and names the
  // root. Every other node needs exactly one parent row.
  using Edge = std::pair<std::string, std::string>;

  explicit Taxonomy(const std::vector<Edge>& edges);

  // CSV rows `child,parent`, root as `root,`. Lines starting with '#' and
  // blank lines are skipped.
  static Taxonomy load_csv(const std::filesystem::path& path);

  std::size_t size() const { return names_.size(); }
  bool contains(const std::string& name) const { return index_.contains(name); }
  const std::string& root() const { return names_[root_]; }
  const std::vector<std::string>& nodes() const { return names_; }

  std::size_t depth(const std::string& name) const;
  std::string lcs(const std::string& a, const std::string& b) const;
  double wup(const std::string& a, const std::string& b) const;

  // All strict descendants, depth-first in declaration order.
  std::vector<std::string> descendants(const std::string& name) const;

 private:
  std::size_t idx(const std::string& name) const;

  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> depth_;
  std::size_t root_ = 0;
};

// Word-embedding table with a uniform dimension.
class Lexicon {
 public:
  explicit Lexicon(std::map<std::string, std::vector<double>> vectors);

  // Text lines `word v1 v2 ... vd`, space-separated.
  static Lexicon load_text(const std::filesystem::path& path);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& word) const {
    return vectors_.contains(word);
  }
  std::span<const double> vector(const std::string& word) const;

 private:
  std::map<std::string, std::vector<double>> vectors_;
  std::size_t dim_ = 0;
};

// u.v / (|u||v|); rejects zero vectors and dim mismatches.
double cosine(std::span<const double> u, std::span<const double> v);

struct ScoredConcept {
  std::string name;
  double similarity = 0.0;
  bool operator==(const ScoredConcept&) const = default;
};

struct ExpansionResult {
  // Descending similarity, ties by lexicographic concept; length <= k.
  std::vector<ScoredConcept> ranked;
  // Bank entries that could not be resolved (warnings, not errors).
  std::vector<std::string> skipped;
};

inline constexpr std::size_t kDefaultExpansionK = 3;

// Whitespace characters become underscores before lookup, matching
// multi-word concept labels.
std::string normalize_concept(const std::string& label);

// Top-k bank concepts by Wu-Palmer similarity to the query. The query itself
// is excluded; an unresolvable query is an error, unresolvable bank entries
// are skipped.
ExpansionResult expand_query(const std::string& query,
                             std::span<const std::string> bank,
                             const Taxonomy& taxonomy,
                             std::size_t k = kDefaultExpansionK);

// Same contract with cosine similarity over the lexicon.
ExpansionResult expand_query(const std::string& query,
                             std::span<const std::string> bank,
                             const Lexicon& lexicon,
                             std::size_t k = kDefaultExpansionK);

}  // namespace locus
