#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "locus/concept_space.hpp"
#include "locus/vector_index.hpp"

namespace locus {

struct LabeledFeature {
  std::int64_t id = 0;
  std::vector<float> features;
  std::set<std::string> labels;
};

struct LinearModel {
  std::string concept_name;
  std::vector<double> weights;
  double bias = 0.0;

  double score(std::span<const float> x) const;
};

// Negatives-per-positive multiplier; an empty k means all available
// negatives (the one-versus-rest configuration).
struct NegativeRatio {
  std::optional<std::size_t> k;

  static constexpr NegativeRatio max() { return {std::nullopt}; }
  static constexpr NegativeRatio of(std::size_t k) { return {k}; }
  bool is_max() const { return !k.has_value(); }
  bool operator==(const NegativeRatio&) const = default;
};

std::string to_string(const NegativeRatio& r);
NegativeRatio parse_neg_ratio(const std::string& text);  // "max" or an integer

inline const std::vector<NegativeRatio> kDefaultRatioGrid{
    NegativeRatio::of(2), NegativeRatio::of(3), NegativeRatio::of(5),
    NegativeRatio::of(10), NegativeRatio::max()};

struct TrainConfig {
  double C = 1.0;
  NegativeRatio neg_ratio = NegativeRatio::max();
  std::size_t epochs = 300;
  double tol = 1e-9;
  std::uint64_t seed = 0;
};

// Squared-hinge SVM objective: 0.5*|w|^2 + C * sum max(0, 1 - y*(w.x+b))^2,
// y in {-1 for negatives, +1 for positives}.
double svm_objective(const std::vector<std::vector<float>>& positives,
                     const std::vector<std::vector<float>>& negatives,
                     std::span<const double> w, double b, double C);
void svm_gradient(const std::vector<std::vector<float>>& positives,
                  const std::vector<std::vector<float>>& negatives,
                  std::span<const double> w, double b, double C,
                  std::span<double> grad_w, double& grad_b);

struct TrainTrace {
  std::vector<double> objective_history;  // one entry per accepted step
};

// Full-batch gradient descent with backtracking line search from a zero
// init; stops when the objective improves by less than tol or epochs run
// out. Deterministic.
LinearModel train_svm(const std::vector<std::vector<float>>& positives,
                      const std::vector<std::vector<float>>& negatives,
                      const TrainConfig& cfg, TrainTrace* trace = nullptr);

// Seeded uniform sample (without replacement) of feature vectors not
// carrying the concept: min(k * positives, available) of them, or all when
// the ratio is max.
std::vector<std::vector<float>> sample_negatives(
    const std::string& concept_name, std::span<const LabeledFeature> pool,
    const TrainConfig& cfg);

// Positives = pool items carrying the concept; negatives sampled per the
// configured ratio.
LinearModel train_one_vs_many(const std::string& concept_name,
                              std::span<const LabeledFeature> pool,
                              const TrainConfig& cfg,
                              TrainTrace* trace = nullptr);

struct RatioSelection {
  NegativeRatio best;
  std::vector<std::pair<NegativeRatio, double>> mean_f1;  // grid order
};

// Stratified seeded cross-validation: mean F1 over folds for every ratio in
// the grid; the best ratio wins, ties going to the earlier (smaller) entry.
RatioSelection select_k_by_cv(
    const std::string& concept_name, std::span<const LabeledFeature> dataset,
    const TrainConfig& cfg,
    std::span<const NegativeRatio> grid = kDefaultRatioGrid,
    std::size_t folds = 5);

struct BinaryRates {
  double tp_rate = 0.0;
  double tn_rate = 0.0;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  double accuracy = 0.0;  // (tp_rate + tn_rate) / 2
};

BinaryRates binary_rates(const std::vector<bool>& truth,
                         const std::vector<bool>& predicted);

// Arithmetic mean of each field (the Average column).
BinaryRates aggregate_rates(std::span<const BinaryRates> per_concept);

// metric rows (tp, tn, fp, fn, acc) by concept columns plus Average.
std::string rates_report_csv(
    const std::vector<std::pair<std::string, BinaryRates>>& per_concept);

struct ConfusionMatrix {
  std::vector<std::string> concepts;            // model order
  std::vector<std::vector<std::size_t>> counts; // truth x predicted
};

// Single-label test items; predicted concept is the score argmax, ties to
// the earlier model.
ConfusionMatrix confusion(std::span<const LinearModel> models,
                          std::span<const LabeledFeature> test);

std::string confusion_csv(const ConfusionMatrix& m);

// Max score over the target and its scored descendants.
double hyponym_score(const std::string& target,
                     const std::map<std::string, double>& scores,
                     const Taxonomy& taxonomy);

// Optional Platt-style score-to-probability mapping. The slope/offset are
// not fitted anywhere here; callers supply them or keep raw scores.
struct Calibration {
  double slope = -1.0;
  double offset = 0.0;

  double apply(double raw_score) const;
};

// JSON-lines features: objects with id, labels array, and embedding inline
// or as vec_row into a VEC1 set.
std::vector<LabeledFeature> read_features_jsonl(
    const std::filesystem::path& path, const VectorSet* vectors = nullptr);
void write_features_jsonl(const std::filesystem::path& path,
                          std::span<const LabeledFeature> items);

// Model files: JSON array of {concept, bias, weights}.
std::vector<LinearModel> read_models_json(const std::filesystem::path& path);
void write_models_json(const std::filesystem::path& path,
                       std::span<const LinearModel> models);

}  // namespace locus
