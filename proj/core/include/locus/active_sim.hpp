#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "locus/classifier.hpp"

namespace locus {

// Batch selection policies for the annotate-train-select loop.
enum class Strategy { kRandom, kUncertainty, kHighConfidence };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& text);

// Simulated annotation timings, in seconds per action. Drawing a box is the
// expensive act; reviewing a proposed box is cheap to accept and cheap to
// delete (a wrong proposal still forces a manual draw afterwards). modify_s
// is carried for configurability but the whole-item oracle never modifies.
struct CostModel {
  double draw_s = 3.6;
  double accept_s = 1.0;
  double delete_s = 1.0;
  double modify_s = 3.0;
  double train_s = 89.0;
  double boxes_per_image = 1.3;
};

void validate(const CostModel& cost);  // all fields non-negative

struct HistoryRow {
  std::size_t round = 0;
  std::size_t labeled = 0;
  double map = 0.0;
  double elapsed_s = 0.0;

  bool operator==(const HistoryRow&) const = default;
};

struct ALState {
  std::set<std::int64_t> labeled;
  std::set<std::int64_t> pool;
  std::optional<LinearModel> model;
  double elapsed_s = 0.0;
  std::vector<HistoryRow> history;
};

// One test item with its model score and ground truth.
struct ScoredItem {
  std::int64_t id = 0;
  double score = 0.0;
  bool positive = false;
};

// Mean of precision at each positive's rank; ranking is by score descending,
// ties by ascending id. Needs at least one positive.
double average_precision(std::vector<ScoredItem> items);
double mean_average_precision(
    const std::map<std::string, std::vector<ScoredItem>>& per_concept);

struct SimOptions {
  std::size_t rounds = 10;
  std::size_t seed_count = 20;  // items labeled up front
  std::size_t batch = 30;
  CostModel cost;
  TrainConfig train;  // train.seed seeds the whole run
};

// Pool-based binary active learning with a ground-truth oracle standing in
// for the annotator. Items are positive iff they carry the concept label.
class ActiveSimulation {
 public:
  // dataset ids must be unique and disjoint from test ids; the test set
  // needs at least one positive so average precision is defined.
  ActiveSimulation(std::string concept_name,
                   std::vector<LabeledFeature> dataset,
                   std::vector<LabeledFeature> test_set);

  ALState initial_state() const;

  // Random: seeded uniform without replacement. Uncertainty: smallest
  // |score| first. HighConfidence: largest score first. Score ties break by
  // ascending id. Model-based strategies require a trained model.
  std::vector<std::int64_t> select_batch(const ALState& state, Strategy s,
                                         std::size_t batch,
                                         std::uint64_t seed) const;

  // Labels one batch (clamped to the pool), charges annotation time,
  // retrains on everything labeled so far, and appends a history row.
  // HighConfidence items are charged accept_s when the current model already
  // predicts the oracle's answer, delete_s + draw_s otherwise; the other
  // strategies pay draw_s per item. All per-item costs scale by
  // boxes_per_image.
  ALState step(ALState state, Strategy s, std::size_t batch,
               const CostModel& cost, const TrainConfig& cfg) const;

  // Seed round of opt.seed_count random items at draw cost, then opt.rounds
  // steps (stopping early if the pool empties). Deterministic in
  // opt.train.seed.
  std::vector<HistoryRow> run(Strategy s, const SimOptions& opt) const;

  bool oracle(std::int64_t id) const;
  double test_map(const LinearModel& model) const;

 private:
  const LabeledFeature& item(std::int64_t id) const;

  std::string concept_name_;
  std::vector<LabeledFeature> dataset_;
  std::vector<LabeledFeature> test_;
  std::map<std::int64_t, std::size_t> index_;
};

// CSV with header round,labeled,map,elapsed_s.
std::string history_csv(std::span<const HistoryRow> history);

// mAP of the last round within the budget. Throws if even the seed round
// exceeds it.
double map_at_images(std::span<const HistoryRow> history, std::size_t images);
double map_at_seconds(std::span<const HistoryRow> history, double seconds);

// Elapsed seconds when the threshold was first reached, if ever.
std::optional<double> seconds_to_map(std::span<const HistoryRow> history,
                                     double threshold);

struct StrategySummary {
  std::string strategy;
  double map_at_budget = 0.0;
  std::optional<double> seconds_to_threshold;
  double boxes_at_budget = 0.0;
};

StrategySummary summarize(Strategy s, std::span<const HistoryRow> history,
                          std::size_t image_budget, double map_threshold,
                          const CostModel& cost);

// CSV with header strategy,map_at_budget,seconds_to_threshold,
// boxes_at_budget; an unreached threshold prints an empty cell.
std::string comparison_csv(std::span<const StrategySummary> rows);

}  // namespace locus
