#include "locus/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "locus/errors.hpp"
#include "locus/rng.hpp"

namespace locus {

namespace {

using nlohmann::json;

void check_class(const std::vector<std::vector<float>>& xs, std::size_t dim,
                 const char* which) {
  if (xs.empty())
    throw ValidationError(std::string(which) + " class is empty");
  for (const auto& x : xs) {
    if (x.size() != dim)
      throw ValidationError(std::string(which) +
                            " feature dim mismatch: " +
                            std::to_string(x.size()) + " vs " +
                            std::to_string(dim));
    for (float v : x)
      if (!std::isfinite(v))
        throw ValidationError(std::string(which) +
                              " class contains a non-finite feature");
  }
}

double dot(std::span<const double> w, std::span<const float> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    s += w[i] * static_cast<double>(x[i]);
  return s;
}

// Shared accumulation over both classes: calls f(x, y, hinge) for every
// margin-violating sample.
template <typename F>
void for_violations(const std::vector<std::vector<float>>& positives,
                    const std::vector<std::vector<float>>& negatives,
                    std::span<const double> w, double b, F&& f) {
  for (const auto& x : positives) {
    double h = 1.0 - (dot(w, x) + b);
    if (h > 0.0) f(x, 1.0, h);
  }
  for (const auto& x : negatives) {
    double h = 1.0 + (dot(w, x) + b);
    if (h > 0.0) f(x, -1.0, h);
  }
}

}  // namespace

double LinearModel::score(std::span<const float> x) const {
  if (x.size() != weights.size())
    throw ValidationError("feature dim " + std::to_string(x.size()) +
                          " does not match model dim " +
                          std::to_string(weights.size()));
  return dot(weights, x) + bias;
}

std::string to_string(const NegativeRatio& r) {
  return r.is_max() ? "max" : std::to_string(*r.k);
}

NegativeRatio parse_neg_ratio(const std::string& text) {
  if (text == "max" || text == "Max" || text == "MAX")
    return NegativeRatio::max();
  // stoul tolerates signs and trailing junk, so gate on digits first.
  bool digits = !text.empty() &&
                std::all_of(text.begin(), text.end(),
                            [](unsigned char c) { return std::isdigit(c); });
  if (digits) {
    try {
      std::size_t pos = 0;
      unsigned long k = std::stoul(text, &pos);
      if (pos == text.size() && k > 0) return NegativeRatio::of(k);
    } catch (const std::exception&) {
    }
  }
  throw ValidationError("negative ratio must be a positive integer or 'max', "
                        "got '" + text + "'");
}

double svm_objective(const std::vector<std::vector<float>>& positives,
                     const std::vector<std::vector<float>>& negatives,
                     std::span<const double> w, double b, double C) {
  double f = 0.0;
  for (double wi : w) f += wi * wi;
  f *= 0.5;
  double loss = 0.0;
  for_violations(positives, negatives, w, b,
                 [&](const auto&, double, double h) { loss += h * h; });
  return f + C * loss;
}

void svm_gradient(const std::vector<std::vector<float>>& positives,
                  const std::vector<std::vector<float>>& negatives,
                  std::span<const double> w, double b, double C,
                  std::span<double> grad_w, double& grad_b) {
  std::copy(w.begin(), w.end(), grad_w.begin());
  grad_b = 0.0;
  for_violations(positives, negatives, w, b,
                 [&](const auto& x, double y, double h) {
                   double c = 2.0 * C * h * y;
                   for (std::size_t i = 0; i < grad_w.size(); ++i)
                     grad_w[i] -= c * static_cast<double>(x[i]);
                   grad_b -= c;
                 });
}

LinearModel train_svm(const std::vector<std::vector<float>>& positives,
                      const std::vector<std::vector<float>>& negatives,
                      const TrainConfig& cfg, TrainTrace* trace) {
  if (positives.empty()) throw ValidationError("positive class is empty");
  if (negatives.empty()) throw ValidationError("negative class is empty");
  const std::size_t dim = positives.front().size();
  if (dim == 0) throw ValidationError("features must be non-empty");
  check_class(positives, dim, "positive");
  check_class(negatives, dim, "negative");
  if (!(cfg.C > 0.0)) throw ValidationError("C must be positive");
  if (cfg.epochs == 0) throw ValidationError("epochs must be positive");
  if (cfg.tol < 0.0) throw ValidationError("tol must be non-negative");

  LinearModel model;
  model.weights.assign(dim, 0.0);
  model.bias = 0.0;

  double f = svm_objective(positives, negatives, model.weights, model.bias,
                           cfg.C);
  if (trace) trace->objective_history.push_back(f);

  std::vector<double> grad(dim);
  std::vector<double> wnew(dim);
  double gb = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    svm_gradient(positives, negatives, model.weights, model.bias, cfg.C, grad,
                 gb);
    double gsq = gb * gb;
    for (double g : grad) gsq += g * g;
    if (gsq == 0.0) break;

    // Backtracking line search keeps the objective monotone.
    double step = 1.0;
    double fnew = 0.0, bnew = 0.0;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      for (std::size_t i = 0; i < dim; ++i)
        wnew[i] = model.weights[i] - step * grad[i];
      bnew = model.bias - step * gb;
      fnew = svm_objective(positives, negatives, wnew, bnew, cfg.C);
      if (fnew <= f - 1e-4 * step * gsq) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    model.weights = wnew;
    model.bias = bnew;
    double improvement = f - fnew;
    f = fnew;
    if (trace) trace->objective_history.push_back(f);
    if (improvement < cfg.tol) break;
  }
  return model;
}

std::vector<std::vector<float>> sample_negatives(
    const std::string& concept_name, std::span<const LabeledFeature> pool,
    const TrainConfig& cfg) {
  std::size_t positives = 0;
  std::vector<const LabeledFeature*> available;
  for (const LabeledFeature& item : pool) {
    if (item.labels.contains(concept_name))
      ++positives;
    else
      available.push_back(&item);
  }
  if (positives == 0)
    throw ValidationError("pool has no items labeled '" + concept_name + "'");
  if (available.empty())
    throw ValidationError("pool has no negatives for '" + concept_name + "'");

  std::size_t take = available.size();
  if (!cfg.neg_ratio.is_max())
    take = std::min(available.size(), *cfg.neg_ratio.k * positives);

  Rng rng(cfg.seed);
  std::vector<std::vector<float>> out;
  out.reserve(take);
  for (std::size_t i : sample_indices(available.size(), take, rng))
    out.push_back(available[i]->features);
  return out;
}

LinearModel train_one_vs_many(const std::string& concept_name,
                              std::span<const LabeledFeature> pool,
                              const TrainConfig& cfg, TrainTrace* trace) {
  std::vector<std::vector<float>> positives;
  for (const LabeledFeature& item : pool)
    if (item.labels.contains(concept_name)) positives.push_back(item.features);
  std::vector<std::vector<float>> negatives =
      sample_negatives(concept_name, pool, cfg);
  LinearModel model = train_svm(positives, negatives, cfg, trace);
  model.concept_name = concept_name;
  return model;
}

namespace {

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

RatioSelection select_k_by_cv(const std::string& concept_name,
                              std::span<const LabeledFeature> dataset,
                              const TrainConfig& cfg,
                              std::span<const NegativeRatio> grid,
                              std::size_t folds) {
  if (folds < 2) throw ValidationError("cross-validation needs >= 2 folds");
  if (grid.empty()) throw ValidationError("ratio grid is empty");

  std::vector<std::size_t> pos_idx, neg_idx;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (dataset[i].labels.contains(concept_name) ? pos_idx : neg_idx).push_back(i);
  if (pos_idx.size() < folds)
    throw ValidationError("need at least " + std::to_string(folds) +
                          " positives for " + std::to_string(folds) +
                          "-fold selection, got " +
                          std::to_string(pos_idx.size()));
  if (neg_idx.size() < folds)
    throw ValidationError("need at least " + std::to_string(folds) +
                          " negatives for " + std::to_string(folds) +
                          "-fold selection, got " +
                          std::to_string(neg_idx.size()));

  // Stratified folds: shuffle each class once, then deal round-robin.
  Rng rng(cfg.seed);
  shuffle(pos_idx, rng);
  shuffle(neg_idx, rng);
  std::vector<std::size_t> fold_of(dataset.size(), 0);
  for (std::size_t i = 0; i < pos_idx.size(); ++i)
    fold_of[pos_idx[i]] = i % folds;
  for (std::size_t i = 0; i < neg_idx.size(); ++i)
    fold_of[neg_idx[i]] = i % folds;

  RatioSelection sel;
  sel.best = grid[0];
  double best_f1 = -1.0;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double f1_sum = 0.0;
    for (std::size_t fold = 0; fold < folds; ++fold) {
      std::vector<LabeledFeature> train_pool;
      std::vector<const LabeledFeature*> test_items;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (fold_of[i] == fold)
          test_items.push_back(&dataset[i]);
        else
          train_pool.push_back(dataset[i]);
      }
      TrainConfig fold_cfg = cfg;
      fold_cfg.neg_ratio = grid[gi];
      fold_cfg.seed = splitmix64(cfg.seed ^ (fold * 1000003 + gi + 1));
      LinearModel model = train_one_vs_many(concept_name, train_pool, fold_cfg);

      std::size_t tp = 0, fp = 0, fn = 0;
      for (const LabeledFeature* item : test_items) {
        bool truth = item->labels.contains(concept_name);
        bool pred = model.score(item->features) > 0.0;
        if (truth && pred) ++tp;
        if (!truth && pred) ++fp;
        if (truth && !pred) ++fn;
      }
      f1_sum += f1_score(tp, fp, fn);
    }
    double mean_f1 = f1_sum / static_cast<double>(folds);
    sel.mean_f1.emplace_back(grid[gi], mean_f1);
    if (mean_f1 > best_f1) {
      best_f1 = mean_f1;
      sel.best = grid[gi];
    }
  }
  return sel;
}

BinaryRates binary_rates(const std::vector<bool>& truth,
                         const std::vector<bool>& predicted) {
  if (truth.size() != predicted.size())
    throw ValidationError("truth and prediction lengths differ");
  if (truth.empty()) throw ValidationError("empty evaluation set");
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] && predicted[i]) ++tp;
    if (truth[i] && !predicted[i]) ++fn;
    if (!truth[i] && predicted[i]) ++fp;
    if (!truth[i] && !predicted[i]) ++tn;
  }
  if (tp + fn == 0 || tn + fp == 0)
    throw ValidationError("rates need both classes present in the truth");
  BinaryRates r;
  r.tp_rate = static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.tn_rate = static_cast<double>(tn) / static_cast<double>(tn + fp);
  r.fp_rate = 1.0 - r.tn_rate;
  r.fn_rate = 1.0 - r.tp_rate;
  r.accuracy = 0.5 * (r.tp_rate + r.tn_rate);
  return r;
}

BinaryRates aggregate_rates(std::span<const BinaryRates> per_concept) {
  if (per_concept.empty())
    throw ValidationError("cannot aggregate an empty rate list");
  BinaryRates avg;
  for (const BinaryRates& r : per_concept) {
    avg.tp_rate += r.tp_rate;
    avg.tn_rate += r.tn_rate;
    avg.fp_rate += r.fp_rate;
    avg.fn_rate += r.fn_rate;
    avg.accuracy += r.accuracy;
  }
  const double n = static_cast<double>(per_concept.size());
  avg.tp_rate /= n;
  avg.tn_rate /= n;
  avg.fp_rate /= n;
  avg.fn_rate /= n;
  avg.accuracy /= n;
  return avg;
}

std::string rates_report_csv(
    const std::vector<std::pair<std::string, BinaryRates>>& per_concept) {
  if (per_concept.empty())
    throw ValidationError("rates report needs at least one concept");
  std::vector<BinaryRates> all;
  for (const auto& [name, r] : per_concept) all.push_back(r);
  BinaryRates avg = aggregate_rates(all);

  std::ostringstream out;
  out << "metric";
  for (const auto& [name, r] : per_concept) out << ',' << name;
  out << ",Average\n";
  auto row = [&](const char* label, auto field) {
    out << label;
    char buf[64];
    for (const auto& [name, r] : per_concept) {
      std::snprintf(buf, sizeof buf, ",%.6g", field(r));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6g", field(avg));
    out << buf << '\n';
  };
  row("tp", [](const BinaryRates& r) { return r.tp_rate; });
  row("tn", [](const BinaryRates& r) { return r.tn_rate; });
  row("fp", [](const BinaryRates& r) { return r.fp_rate; });
  row("fn", [](const BinaryRates& r) { return r.fn_rate; });
  row("acc", [](const BinaryRates& r) { return r.accuracy; });
  return out.str();
}

ConfusionMatrix confusion(std::span<const LinearModel> models,
                          std::span<const LabeledFeature> test) {
  if (models.empty()) throw ValidationError("confusion needs models");
  if (test.empty()) throw ValidationError("confusion needs test items");
  ConfusionMatrix m;
  std::map<std::string, std::size_t> row_of;
  for (const LinearModel& model : models) {
    if (!row_of.emplace(model.concept_name, m.concepts.size()).second)
      throw ValidationError("duplicate model concept '" + model.concept_name +
                            "'");
    m.concepts.push_back(model.concept_name);
  }
  m.counts.assign(m.concepts.size(),
                  std::vector<std::size_t>(m.concepts.size(), 0));

  for (const LabeledFeature& item : test) {
    if (item.labels.size() != 1)
      throw ValidationError("confusion needs single-label items; item " +
                            std::to_string(item.id) + " has " +
                            std::to_string(item.labels.size()) + " labels");
    const std::string& truth = *item.labels.begin();
    auto it = row_of.find(truth);
    if (it == row_of.end())
      throw ValidationError("test item " + std::to_string(item.id) +
                            " labeled '" + truth + "' which has no model");
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < models.size(); ++j) {
      double s = models[j].score(item.features);
      if (s > best_score) {
        best_score = s;
        best = j;
      }
    }
    ++m.counts[it->second][best];
  }
  return m;
}

std::string confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream out;
  out << "truth";
  for (const std::string& c : m.concepts) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.concepts.size(); ++i) {
    out << m.concepts[i];
    for (std::size_t j = 0; j < m.concepts.size(); ++j)
      out << ',' << m.counts[i][j];
    out << '\n';
  }
  return out.str();
}

double hyponym_score(const std::string& target,
                     const std::map<std::string, double>& scores,
                     const Taxonomy& taxonomy) {
  if (!taxonomy.contains(target))
    throw ValidationError("concept not in taxonomy: " + target);
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  auto consider = [&](const std::string& name) {
    auto it = scores.find(name);
    if (it != scores.end()) {
      best = std::max(best, it->second);
      found = true;
    }
  };
  consider(target);
  for (const std::string& d : taxonomy.descendants(target)) consider(d);
  if (!found)
    throw ValidationError("no scored node under '" + target + "'");
  return best;
}

double Calibration::apply(double raw_score) const {
  return 1.0 / (1.0 + std::exp(slope * raw_score + offset));
}

std::vector<LabeledFeature> read_features_jsonl(
    const std::filesystem::path& path, const VectorSet* vectors) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open features: " + path.string());
  std::vector<LabeledFeature> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::string ctx = path.string() + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(ctx + ": " + e.what());
    }
    try {
      LabeledFeature item;
      item.id = obj.at("id").get<std::int64_t>();
      for (const auto& l : obj.at("labels"))
        item.labels.insert(l.get<std::string>());
      if (obj.contains("embedding")) {
        for (const auto& v : obj["embedding"])
          item.features.push_back(v.get<float>());
      } else if (obj.contains("vec_row")) {
        if (!vectors)
          throw ValidationError(ctx + ": vec_row given but no vector file");
        std::size_t row = obj["vec_row"].get<std::size_t>();
        if (row >= vectors->count())
          throw ValidationError(ctx + ": vec_row " + std::to_string(row) +
                                " out of range");
        auto r = vectors->row(row);
        item.features.assign(r.begin(), r.end());
      } else {
        throw ValidationError(ctx + ": needs embedding or vec_row");
      }
      out.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw FormatError(ctx + ": " + e.what());
    }
  }
  return out;
}

void write_features_jsonl(const std::filesystem::path& path,
                          std::span<const LabeledFeature> items) {
  std::ostringstream buf;
  for (const LabeledFeature& item : items) {
    json obj;
    obj["id"] = item.id;
    obj["labels"] = item.labels;
    obj["embedding"] = item.features;
    buf << obj.dump() << '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out << buf.str();
  if (!out) throw ValidationError("write failed: " + path.string());
}

std::vector<LinearModel> read_models_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    std::vector<LinearModel> out;
    for (const auto& obj : doc) {
      LinearModel m;
      m.concept_name = obj.at("concept").get<std::string>();
      m.bias = obj.at("bias").get<double>();
      for (const auto& w : obj.at("weights"))
        m.weights.push_back(w.get<double>());
      for (double w : m.weights)
        if (!std::isfinite(w))
          throw ValidationError(path.string() + ": non-finite weight in '" +
                                m.concept_name + "'");
      out.push_back(std::move(m));
    }
    return out;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_models_json(const std::filesystem::path& path,
                       std::span<const LinearModel> models) {
  json doc = json::array();
  for (const LinearModel& m : models) {
    json obj;
    obj["concept"] = m.concept_name;
    obj["bias"] = m.bias;
    obj["weights"] = m.weights;
    doc.push_back(obj);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw ValidationError("write failed: " + path.string());
}

}  // namespace locus
