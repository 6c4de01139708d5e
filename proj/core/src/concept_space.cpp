#include "locus/concept_space.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "locus/errors.hpp"

namespace locus {

Taxonomy::Taxonomy(const std::vector<Edge>& edges) {
  if (edges.empty()) throw ValidationError("taxonomy has no edges");

  auto intern = [this](const std::string& name) -> std::size_t {
    auto [it, inserted] = index_.emplace(name, names_.size());
    if (inserted) {
      names_.push_back(name);
      parent_.emplace_back();
    }
    return it->second;
  };

  std::optional<std::size_t> root;
  std::vector<bool> has_edge;
  for (const auto& [child, parent] : edges) {
    if (child.empty()) throw ValidationError("taxonomy row with empty child");
    std::size_t c = intern(child);
    if (has_edge.size() < names_.size()) has_edge.resize(names_.size(), false);
    if (has_edge[c])
      throw ValidationError("node '" + child +
                            "' appears in more than one child row");
    has_edge[c] = true;
    if (parent.empty()) {
      if (root)
        throw ValidationError("taxonomy declares more than one root");
      root = c;
    } else {
      std::size_t p = intern(parent);
      if (has_edge.size() < names_.size()) has_edge.resize(names_.size(), false);
      parent_[c] = p;
    }
  }
  if (!root) throw ValidationError("taxonomy declares no root row");
  root_ = *root;

  for (std::size_t i = 0; i < names_.size(); ++i)
    if (i != root_ && !parent_[i])
      throw ValidationError("node '" + names_[i] +
                            "' has no parent row and is not the root");

  children_.resize(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (parent_[i]) children_[*parent_[i]].push_back(i);

  // Breadth-first from the root assigns depths and proves the edges form a
  // single connected tree (a cycle or second component stays unreached).
  depth_.assign(names_.size(), 0);
  depth_[root_] = 1;
  std::deque<std::size_t> queue{root_};
  std::size_t reached = 0;
  while (!queue.empty()) {
    std::size_t n = queue.front();
    queue.pop_front();
    ++reached;
    for (std::size_t c : children_[n]) {
      depth_[c] = depth_[n] + 1;
      queue.push_back(c);
    }
  }
  if (reached != names_.size())
    throw ValidationError("taxonomy edges contain a cycle");
}

Taxonomy Taxonomy::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open taxonomy file: " + path.string());
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "child,parent") continue;  // optional header
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected `child,parent`");
    edges.emplace_back(line.substr(0, comma), line.substr(comma + 1));
  }
  return Taxonomy(edges);
}

std::size_t Taxonomy::idx(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ValidationError("concept not in taxonomy: " + name);
  return it->second;
}

std::size_t Taxonomy::depth(const std::string& name) const {
  return depth_[idx(name)];
}

std::string Taxonomy::lcs(const std::string& a, const std::string& b) const {
  std::size_t x = idx(a), y = idx(b);
  while (depth_[x] > depth_[y]) x = *parent_[x];
  while (depth_[y] > depth_[x]) y = *parent_[y];
  while (x != y) {
    x = *parent_[x];
    y = *parent_[y];
  }
  return names_[x];
}

double Taxonomy::wup(const std::string& a, const std::string& b) const {
  double d = static_cast<double>(depth(lcs(a, b)));
  return 2.0 * d / (static_cast<double>(depth(a)) + static_cast<double>(depth(b)));
}

std::vector<std::string> Taxonomy::descendants(const std::string& name) const {
  std::vector<std::string> out;
  std::function<void(std::size_t)> walk = [&](std::size_t n) {
    for (std::size_t c : children_[n]) {
      out.push_back(names_[c]);
      walk(c);
    }
  };
  walk(idx(name));
  return out;
}

Lexicon::Lexicon(std::map<std::string, std::vector<double>> vectors)
    : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw ValidationError("lexicon is empty");
  dim_ = vectors_.begin()->second.size();
  if (dim_ == 0) throw ValidationError("lexicon vectors must be non-empty");
  for (const auto& [word, vec] : vectors_) {
    if (vec.size() != dim_)
      throw ValidationError("lexicon dim mismatch at word '" + word + "': " +
                            std::to_string(vec.size()) + " vs " +
                            std::to_string(dim_));
    for (double v : vec)
      if (!std::isfinite(v))
        throw ValidationError("non-finite lexicon value at word '" + word +
                              "'");
  }
}

Lexicon Lexicon::load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon file: " + path.string());
  std::map<std::string, std::vector<double>> vectors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    std::vector<double> vec;
    std::string token;
    while (fields >> token) {
      try {
        std::size_t pos = 0;
        double v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        vec.push_back(v);
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": bad number '" + token + "'");
      }
    }
    if (word.empty() || vec.empty())
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected `word v1 v2 ...`");
    if (!vectors.emplace(word, std::move(vec)).second)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate word '" + word + "'");
  }
  return Lexicon(std::move(vectors));
}

std::span<const double> Lexicon::vector(const std::string& word) const {
  auto it = vectors_.find(word);
  if (it == vectors_.end())
    throw ValidationError("word not in lexicon: " + word);
  return it->second;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw ValidationError("cosine dim mismatch: " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
  if (u.empty()) throw ValidationError("cosine of empty vectors");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0)
    throw ValidationError("cosine of a zero vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::string normalize_concept(const std::string& label) {
  std::string out = label;
  for (char& c : out)
    if (std::isspace(static_cast<unsigned char>(c))) c = '_';
  return out;
}

namespace {

ExpansionResult rank_bank(
    const std::string& query, std::span<const std::string> bank, std::size_t k,
    const std::function<std::optional<double>(const std::string&)>& score) {
  if (k == 0) throw ValidationError("k must be positive");
  const std::string nq = normalize_concept(query);
  ExpansionResult result;
  std::set<std::string> seen;
  for (const std::string& label : bank) {
    std::string nb = normalize_concept(label);
    if (nb == nq) continue;  // the query itself never appears in its expansion
    if (!seen.insert(nb).second) continue;
    std::optional<double> sim = score(nb);
    if (!sim) {
      result.skipped.push_back(label);
      continue;
    }
    result.ranked.push_back({label, *sim});
  }
  std::sort(result.ranked.begin(), result.ranked.end(),
            [](const ScoredConcept& a, const ScoredConcept& b) {
              if (a.similarity != b.similarity)
                return a.similarity > b.similarity;
              return a.name < b.name;
            });
  if (result.ranked.size() > k) result.ranked.resize(k);
  return result;
}

}  // namespace

ExpansionResult expand_query(const std::string& query,
                             std::span<const std::string> bank,
                             const Taxonomy& taxonomy, std::size_t k) {
  const std::string nq = normalize_concept(query);
  if (!taxonomy.contains(nq))
    throw ValidationError("unknown query: '" + query +
                          "' is not in the taxonomy");
  return rank_bank(query, bank, k,
                   [&](const std::string& nb) -> std::optional<double> {
                     if (!taxonomy.contains(nb)) return std::nullopt;
                     return taxonomy.wup(nq, nb);
                   });
}

ExpansionResult expand_query(const std::string& query,
                             std::span<const std::string> bank,
                             const Lexicon& lexicon, std::size_t k) {
  const std::string nq = normalize_concept(query);
  if (!lexicon.contains(nq))
    throw ValidationError("unknown query: '" + query +
                          "' is not in the lexicon");
  std::span<const double> qv = lexicon.vector(nq);
  return rank_bank(query, bank, k,
                   [&](const std::string& nb) -> std::optional<double> {
                     if (!lexicon.contains(nb)) return std::nullopt;
                     return cosine(qv, lexicon.vector(nb));
                   });
}

}  // namespace locus
