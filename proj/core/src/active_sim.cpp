#include "locus/active_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "locus/errors.hpp"
#include "locus/rng.hpp"

namespace locus {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kRandom: return "random";
    case Strategy::kUncertainty: return "uncertainty";
    case Strategy::kHighConfidence: return "high-confidence";
  }
  throw InternalError("unhandled strategy value");
}

Strategy parse_strategy(const std::string& text) {
  if (text == "random") return Strategy::kRandom;
  if (text == "uncertainty") return Strategy::kUncertainty;
  if (text == "high-confidence") return Strategy::kHighConfidence;
  throw ValidationError(
      "strategy must be one of random, uncertainty, high-confidence; got '" +
      text + "'");
}

void validate(const CostModel& cost) {
  auto bad = [](double v) { return !(v >= 0.0) || !std::isfinite(v); };
  if (bad(cost.draw_s) || bad(cost.accept_s) || bad(cost.delete_s) ||
      bad(cost.modify_s) || bad(cost.train_s) || bad(cost.boxes_per_image))
    throw ValidationError("cost model fields must be non-negative");
}

double average_precision(std::vector<ScoredItem> items) {
  if (items.empty()) throw ValidationError("average precision of nothing");
  std::sort(items.begin(), items.end(),
            [](const ScoredItem& a, const ScoredItem& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.id < b.id;
            });
  std::size_t positives = 0;
  double sum = 0.0;
  for (std::size_t rank = 1; rank <= items.size(); ++rank) {
    if (items[rank - 1].positive) {
      ++positives;
      sum += static_cast<double>(positives) / static_cast<double>(rank);
    }
  }
  if (positives == 0)
    throw ValidationError("average precision needs at least one positive");
  return sum / static_cast<double>(positives);
}

double mean_average_precision(
    const std::map<std::string, std::vector<ScoredItem>>& per_concept) {
  if (per_concept.empty())
    throw ValidationError("mean average precision over no concepts");
  double sum = 0.0;
  for (const auto& [name, items] : per_concept) sum += average_precision(items);
  return sum / static_cast<double>(per_concept.size());
}

ActiveSimulation::ActiveSimulation(std::string concept_name,
                                   std::vector<LabeledFeature> dataset,
                                   std::vector<LabeledFeature> test_set)
    : concept_name_(std::move(concept_name)),
      dataset_(std::move(dataset)),
      test_(std::move(test_set)) {
  if (dataset_.empty()) throw ValidationError("empty simulation pool");
  if (test_.empty()) throw ValidationError("empty test set");
  const std::size_t dim = dataset_.front().features.size();
  for (std::size_t i = 0; i < dataset_.size(); ++i) {
    if (dataset_[i].features.size() != dim)
      throw ValidationError("pool feature dims differ");
    if (!index_.emplace(dataset_[i].id, i).second)
      throw ValidationError("duplicate pool id " +
                            std::to_string(dataset_[i].id));
  }
  bool any_positive = false;
  for (const LabeledFeature& t : test_) {
    if (t.features.size() != dim)
      throw ValidationError("test feature dims differ from the pool");
    if (index_.contains(t.id))
      throw ValidationError("test id " + std::to_string(t.id) +
                            " also appears in the pool");
    any_positive |= t.labels.contains(concept_name_);
  }
  if (!any_positive)
    throw ValidationError("test set has no '" + concept_name_ + "' positives");
}

ALState ActiveSimulation::initial_state() const {
  ALState state;
  for (const LabeledFeature& item : dataset_) state.pool.insert(item.id);
  return state;
}

bool ActiveSimulation::oracle(std::int64_t id) const {
  return item(id).labels.contains(concept_name_);
}

const LabeledFeature& ActiveSimulation::item(std::int64_t id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw InternalError("id " + std::to_string(id) + " is not in the pool");
  return dataset_[it->second];
}

std::vector<std::int64_t> ActiveSimulation::select_batch(
    const ALState& state, Strategy s, std::size_t batch,
    std::uint64_t seed) const {
  if (batch == 0) throw ValidationError("batch must be positive");
  if (batch > state.pool.size())
    throw ValidationError("batch " + std::to_string(batch) +
                          " exceeds pool size " +
                          std::to_string(state.pool.size()));
  std::vector<std::int64_t> pool(state.pool.begin(), state.pool.end());

  if (s == Strategy::kRandom) {
    Rng rng(seed);
    std::vector<std::int64_t> out;
    for (std::size_t i : sample_indices(pool.size(), batch, rng))
      out.push_back(pool[i]);
    return out;
  }

  if (!state.model.has_value())
    throw ValidationError("the " + to_string(s) +
                          " strategy needs a model; run the seed round first");
  std::vector<std::pair<double, std::int64_t>> keyed;
  keyed.reserve(pool.size());
  for (std::int64_t id : pool) {
    double score = state.model->score(item(id).features);
    keyed.emplace_back(
        s == Strategy::kUncertainty ? std::abs(score) : -score, id);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < batch; ++i) out.push_back(keyed[i].second);
  return out;
}

double ActiveSimulation::test_map(const LinearModel& model) const {
  std::vector<ScoredItem> scored;
  scored.reserve(test_.size());
  for (const LabeledFeature& t : test_)
    scored.push_back(
        {t.id, model.score(t.features), t.labels.contains(concept_name_)});
  return average_precision(std::move(scored));
}

ALState ActiveSimulation::step(ALState state, Strategy s, std::size_t batch,
                               const CostModel& cost,
                               const TrainConfig& cfg) const {
  validate(cost);
  if (state.pool.empty()) throw ValidationError("the pool is exhausted");
  const std::size_t round = state.history.size();
  const std::size_t take = std::min(batch, state.pool.size());
  const std::uint64_t round_seed = splitmix64(cfg.seed + round);
  std::vector<std::int64_t> picked = select_batch(state, s, take, round_seed);

  for (std::int64_t id : picked) {
    double per_item = cost.draw_s;
    if (s == Strategy::kHighConfidence) {
      // The model proposed this item; a correct proposal is just confirmed,
      // a wrong one is deleted and redrawn by hand.
      bool predicted = state.model->score(item(id).features) > 0.0;
      per_item = predicted == oracle(id) ? cost.accept_s
                                         : cost.delete_s + cost.draw_s;
    }
    state.elapsed_s += per_item * cost.boxes_per_image;
    state.pool.erase(id);
    state.labeled.insert(id);
  }

  std::vector<LabeledFeature> labeled_items;
  labeled_items.reserve(state.labeled.size());
  for (std::int64_t id : state.labeled) labeled_items.push_back(item(id));
  TrainConfig round_cfg = cfg;
  round_cfg.seed = splitmix64(round_seed + 1);
  state.model = train_one_vs_many(concept_name_, labeled_items, round_cfg);
  state.elapsed_s += cost.train_s;

  state.history.push_back({round, state.labeled.size(),
                           test_map(*state.model), state.elapsed_s});
  return state;
}

std::vector<HistoryRow> ActiveSimulation::run(Strategy s,
                                              const SimOptions& opt) const {
  validate(opt.cost);
  if (opt.seed_count == 0) throw ValidationError("seed round must be > 0");
  if (opt.seed_count > dataset_.size())
    throw ValidationError("seed round exceeds the pool");
  if (opt.batch == 0) throw ValidationError("batch must be positive");

  // Seed round: everything is drawn by hand, whatever the strategy.
  ALState state = initial_state();
  std::vector<std::int64_t> seed_ids = select_batch(
      state, Strategy::kRandom, opt.seed_count, splitmix64(opt.train.seed));
  for (std::int64_t id : seed_ids) {
    state.elapsed_s += opt.cost.draw_s * opt.cost.boxes_per_image;
    state.pool.erase(id);
    state.labeled.insert(id);
  }
  std::vector<LabeledFeature> labeled_items;
  for (std::int64_t id : state.labeled) labeled_items.push_back(item(id));
  TrainConfig seed_cfg = opt.train;
  seed_cfg.seed = splitmix64(splitmix64(opt.train.seed) + 1);
  state.model = train_one_vs_many(concept_name_, labeled_items, seed_cfg);
  state.elapsed_s += opt.cost.train_s;
  state.history.push_back(
      {0, state.labeled.size(), test_map(*state.model), state.elapsed_s});

  for (std::size_t r = 0; r < opt.rounds && !state.pool.empty(); ++r)
    state = step(state, s, opt.batch, opt.cost, opt.train);
  return state.history;
}

std::string history_csv(std::span<const HistoryRow> history) {
  std::ostringstream out;
  out << "round,labeled,map,elapsed_s\n";
  char buf[96];
  for (const HistoryRow& row : history) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.6g,%.6g", row.round, row.labeled,
                  row.map, row.elapsed_s);
    out << buf << '\n';
  }
  return out.str();
}

namespace {

const HistoryRow* last_within(std::span<const HistoryRow> history,
                              auto within) {
  const HistoryRow* hit = nullptr;
  for (const HistoryRow& row : history)
    if (within(row)) hit = &row;
  return hit;
}

}  // namespace

double map_at_images(std::span<const HistoryRow> history, std::size_t images) {
  const HistoryRow* row = last_within(
      history, [&](const HistoryRow& r) { return r.labeled <= images; });
  if (!row)
    throw ValidationError("image budget " + std::to_string(images) +
                          " is below the seed round");
  return row->map;
}

double map_at_seconds(std::span<const HistoryRow> history, double seconds) {
  const HistoryRow* row = last_within(
      history, [&](const HistoryRow& r) { return r.elapsed_s <= seconds; });
  if (!row) throw ValidationError("time budget is below the seed round");
  return row->map;
}

std::optional<double> seconds_to_map(std::span<const HistoryRow> history,
                                     double threshold) {
  for (const HistoryRow& row : history)
    if (row.map >= threshold) return row.elapsed_s;
  return std::nullopt;
}

StrategySummary summarize(Strategy s, std::span<const HistoryRow> history,
                          std::size_t image_budget, double map_threshold,
                          const CostModel& cost) {
  if (history.empty()) throw ValidationError("empty history");
  const HistoryRow* row = last_within(history, [&](const HistoryRow& r) {
    return r.labeled <= image_budget;
  });
  if (!row)
    throw ValidationError("image budget " + std::to_string(image_budget) +
                          " is below the seed round");
  StrategySummary out;
  out.strategy = to_string(s);
  out.map_at_budget = row->map;
  out.seconds_to_threshold = seconds_to_map(history, map_threshold);
  out.boxes_at_budget =
      static_cast<double>(row->labeled) * cost.boxes_per_image;
  return out;
}

std::string comparison_csv(std::span<const StrategySummary> rows) {
  std::ostringstream out;
  out << "strategy,map_at_budget,seconds_to_threshold,boxes_at_budget\n";
  char buf[64];
  for (const StrategySummary& row : rows) {
    out << row.strategy;
    std::snprintf(buf, sizeof buf, ",%.6g", row.map_at_budget);
    out << buf;
    if (row.seconds_to_threshold) {
      std::snprintf(buf, sizeof buf, ",%.6g", *row.seconds_to_threshold);
      out << buf;
    } else {
      out << ',';
    }
    std::snprintf(buf, sizeof buf, ",%.6g", row.boxes_at_budget);
    out << buf << '\n';
  }
  return out.str();
}

}  // namespace locus
