// Command-line front end for the locus toolkit. Every command reads its
// inputs fully, computes in memory, and writes whole output files at the
// end, so a failing run never leaves partial results. Exit codes: 0 success,
// 2 undecodable input, 3 validation error, 4 broken internal invariant.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "locus/active_sim.hpp"
#include "locus/classifier.hpp"
#include "locus/concept_space.hpp"
#include "locus/errors.hpp"
#include "locus/geo_localizer.hpp"
#include "locus/osm.hpp"
#include "locus/rng.hpp"
#include "locus/sampling.hpp"
#include "locus/vector_index.hpp"

#include "gix.hpp"
#include "run_config.hpp"
#include "table_io.hpp"

namespace locus::cli {
namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

RunConfig maybe_config(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

// Flag beats config beats the built-in default already in `flag_value`.
template <typename T, typename U>
T resolve(const CLI::Option* opt, T flag_value,
          const std::optional<U>& config_value) {
  if (opt->count() > 0) return flag_value;
  if (config_value) return static_cast<T>(*config_value);
  return flag_value;
}

std::uint64_t need_seed(const CLI::Option* opt, std::uint64_t flag_value,
                        const RunConfig& cfg) {
  if (opt->count() > 0) return flag_value;
  if (cfg.seed) return *cfg.seed;
  throw ValidationError(
      "this command is seeded: pass --seed or set \"seed\" in the config");
}

void l2_normalize(std::vector<float>& v, std::int64_t id) {
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0))
    throw ValidationError("cannot normalize the zero embedding of record " +
                          std::to_string(id));
  for (float& x : v) x = static_cast<float>(x / norm);
}

VectorSet* load_vectors(const std::string& path, std::optional<VectorSet>& slot) {
  if (path.empty()) return nullptr;
  slot = read_vec(path);
  return &*slot;
}

// Fixed bank of well-separated city centers for synthetic datasets.
const std::vector<GeoPoint> kSynthCenters{
    {52.52, 13.405},   {40.71, -74.01},  {35.68, 139.69}, {-33.87, 151.21},
    {48.86, 2.35},     {55.75, 37.62},   {1.35, 103.82},  {-23.55, -46.63},
    {37.77, -122.42},  {30.04, 31.24},   {19.43, -99.13}, {59.33, 18.07}};

// ---------------------------------------------------------------- commands

void add_osm_extract(CLI::App& app) {
  auto cmd = app.add_subcommand("osm-extract",
                                "Extract street nodes from an OSM XML file");
  auto osm_path = std::make_shared<std::string>();
  auto polygon_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  cmd->add_option("--osm", *osm_path, "OSM XML input")->required();
  cmd->add_option("--polygon", *polygon_path,
                  "boundary polygon CSV (lat,lon vertices)");
  cmd->add_option("--out", *out_path, "output CSV (id,lat,lon)")->required();
  cmd->callback([=]() {
    OsmDocument doc = parse_osm_file(*osm_path);
    std::optional<Polygon> boundary;
    if (!polygon_path->empty()) boundary = load_polygon_csv(*polygon_path);
    ExtractReport report;
    std::vector<OsmNode> nodes = extract_street_node_records(
        doc.nodes, doc.ways, boundary ? &*boundary : nullptr, &report);
    std::ostringstream csv;
    csv << "id,lat,lon\n";
    for (const OsmNode& n : nodes)
      csv << n.id << ',' << fmt6(n.location.lat) << ',' << fmt6(n.location.lon)
          << '\n';
    if (report.dangling_refs > 0)
      std::cerr << "note: skipped " << report.dangling_refs
                << " dangling node reference(s)\n";
    write_text(*out_path, csv.str());
  });
}

void add_sample(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "sample", "Spread-out subsample of points via k-means medoids");
  auto points_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto config_path = std::make_shared<std::string>();
  auto k = std::make_shared<std::size_t>(1);
  auto seed = std::make_shared<std::uint64_t>(0);
  cmd->add_option("--points", *points_path, "input CSV (lat,lon or id,lat,lon)")
      ->required();
  cmd->add_option("--k", *k, "number of points to keep")->required();
  auto seed_opt = cmd->add_option("--seed", *seed, "clustering seed");
  cmd->add_option("--out", *out_path, "output CSV (lat,lon)")->required();
  cmd->add_option("--config", *config_path, "defaults file (JSON)");
  cmd->callback([=]() {
    RunConfig cfg = maybe_config(*config_path);
    std::vector<GeoPoint> points = read_points_csv(*points_path);
    SamplingConfig sc;
    sc.k = *k;
    sc.seed = need_seed(seed_opt, *seed, cfg);
    std::vector<GeoPoint> kept = sample_spread(points, sc);
    std::ostringstream csv;
    csv << "lat,lon\n";
    for (const GeoPoint& p : kept)
      csv << fmt6(p.lat) << ',' << fmt6(p.lon) << '\n';
    write_text(*out_path, csv.str());
  });
}

void add_split(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "split", "Leakage-free train/test split on a spatial grid");
  auto records_path = std::make_shared<std::string>();
  auto vectors_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto config_path = std::make_shared<std::string>();
  auto cell_deg = std::make_shared<double>(0.01);
  auto train_frac = std::make_shared<double>(0.8);
  auto seed = std::make_shared<std::uint64_t>(0);
  cmd->add_option("--records", *records_path, "geo records JSONL")->required();
  cmd->add_option("--vectors", *vectors_path, "VEC1 file for vec_row records");
  cmd->add_option("--cell-deg", *cell_deg, "grid cell size in degrees");
  cmd->add_option("--train-frac", *train_frac, "train fraction");
  auto seed_opt = cmd->add_option("--seed", *seed, "cell hash seed");
  cmd->add_option("--out", *out_path, "output CSV (id,partition)")->required();
  cmd->add_option("--config", *config_path, "defaults file (JSON)");
  cmd->callback([=]() {
    RunConfig cfg = maybe_config(*config_path);
    std::optional<VectorSet> vs;
    std::vector<GeoRecord> records =
        read_georecords_jsonl(*records_path, load_vectors(*vectors_path, vs));
    SplitConfig sc;
    sc.cell_deg = *cell_deg;
    sc.train_fraction = *train_frac;
    sc.seed = need_seed(seed_opt, *seed, cfg);
    std::vector<GeoPoint> locations;
    locations.reserve(records.size());
    for (const GeoRecord& r : records) locations.push_back(r.location);
    std::vector<Partition> parts = grid_split(locations, sc);

    // Surface the no-straddling invariant as a hard failure.
    std::map<GridCellId, Partition> cell_part;
    for (std::size_t i = 0; i < records.size(); ++i) {
      GridCellId cell = cell_of(locations[i], sc.cell_deg);
      auto [it, fresh] = cell_part.emplace(cell, parts[i]);
      if (!fresh && it->second != parts[i])
        throw InternalError("grid cell straddles the train/test boundary");
    }

    std::ostringstream csv;
    csv << "id,partition\n";
    for (std::size_t i = 0; i < records.size(); ++i)
      csv << records[i].id << ','
          << (parts[i] == Partition::Train ? "train" : "test") << '\n';
    write_text(*out_path, csv.str());
  });
}

void add_synth(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "synth", "Generate a synthetic multi-city geo dataset");
  auto out_path = std::make_shared<std::string>();
  auto config_path = std::make_shared<std::string>();
  auto cities = std::make_shared<std::size_t>(4);
  auto per_city = std::make_shared<std::size_t>(500);
  auto embed_dim = std::make_shared<std::size_t>(8);
  auto noise = std::make_shared<double>(0.1);
  auto spread_km = std::make_shared<double>(5.0);
  auto seed = std::make_shared<std::uint64_t>(0);
  cmd->add_option("--cities", *cities, "city count (max 12)");
  cmd->add_option("--per-city", *per_city, "records per city");
  cmd->add_option("--embed-dim", *embed_dim, "embedding dimension");
  cmd->add_option("--noise", *noise, "embedding noise std");
  cmd->add_option("--spread-km", *spread_km, "location spread around centers");
  auto seed_opt = cmd->add_option("--seed", *seed, "generator seed");
  cmd->add_option("--out", *out_path, "output JSONL")->required();
  cmd->add_option("--config", *config_path, "defaults file (JSON)");
  cmd->callback([=]() {
    RunConfig cfg = maybe_config(*config_path);
    if (*cities == 0 || *cities > kSynthCenters.size())
      throw ValidationError("--cities must be between 1 and " +
                            std::to_string(kSynthCenters.size()));
    std::vector<CitySpec> specs;
    for (std::size_t c = 0; c < *cities; ++c) {
      char name[16];
      std::snprintf(name, sizeof name, "city_%02zu", c);
      specs.push_back({name, kSynthCenters[c], *per_city});
    }
    std::vector<GeoRecord> records =
        synth_dataset(specs, *embed_dim, *spread_km, *noise,
                      need_seed(seed_opt, *seed, cfg));
    write_georecords_jsonl(*out_path, records);
  });
}

void add_index(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "index", "Build a geo search index file from records");
  auto records_path = std::make_shared<std::string>();
  auto vectors_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto config_path = std::make_shared<std::string>();
  auto pq = std::make_shared<bool>(false);
  auto normalize = std::make_shared<bool>(false);
  auto m = std::make_shared<std::size_t>(0);
  auto k_centroids = std::make_shared<std::size_t>(256);
  auto train_iters = std::make_shared<std::size_t>(25);
  auto seed = std::make_shared<std::uint64_t>(0);
  cmd->add_option("--records", *records_path, "geo records JSONL")->required();
  cmd->add_option("--vectors", *vectors_path, "VEC1 file for vec_row records");
  cmd->add_flag("--pq", *pq, "product-quantize the embeddings");
  cmd->add_flag("--normalize", *normalize,
                "L2-normalize embeddings before indexing");
  auto m_opt = cmd->add_option("--m", *m, "PQ subspaces (0 = auto)");
  auto kc_opt =
      cmd->add_option("--k-centroids", *k_centroids, "PQ codebook size");
  auto ti_opt =
      cmd->add_option("--train-iters", *train_iters, "PQ k-means iterations");
  auto seed_opt = cmd->add_option("--seed", *seed, "PQ training seed");
  cmd->add_option("--out", *out_path, "output index file")->required();
  cmd->add_option("--config", *config_path, "defaults file (JSON)");
  cmd->callback([=]() {
    RunConfig cfg = maybe_config(*config_path);
    std::optional<VectorSet> vs;
    std::vector<GeoRecord> records =
        read_georecords_jsonl(*records_path, load_vectors(*vectors_path, vs));
    if (records.empty()) throw ValidationError("no records to index");

    GixFile gix;
    gix.quantized = *pq;
    gix.normalized = *normalize;
    gix.records = std::move(records);
    if (gix.normalized)
      for (GeoRecord& r : gix.records) l2_normalize(r.embedding, r.id);
    if (gix.quantized) {
      gix.pq.m = resolve(m_opt, *m, cfg.pq_m);
      if (gix.pq.m == 0)
        gix.pq.m = default_pq_m(gix.records.front().embedding.size());
      gix.pq.k_centroids = resolve(kc_opt, *k_centroids, cfg.pq_k_centroids);
      gix.pq.train_iters = resolve(ti_opt, *train_iters, cfg.pq_train_iters);
      gix.pq.seed = need_seed(seed_opt, *seed, cfg);
    }
    gix.build();  // surface bad configurations before any output exists
    write_gix(*out_path, gix);
  });
}

std::vector<GeoRecord> load_queries(const std::string& records_path,
                                    const std::string& vectors_path,
                                    const GixFile& gix) {
  std::optional<VectorSet> vs;
  std::vector<GeoRecord> queries =
      read_georecords_jsonl(records_path, load_vectors(vectors_path, vs));
  if (gix.normalized)
    for (GeoRecord& q : queries) l2_normalize(q.embedding, q.id);
  return queries;
}

void add_query(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "query", "Locate query embeddings against an index file");
  auto index_path = std::make_shared<std::string>();
  auto queries_path = std::make_shared<std::string>();
  auto vectors_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto nn = std::make_shared<std::size_t>(1);
  cmd->add_option("--index", *index_path, "index file")->required();
  cmd->add_option("--queries", *queries_path, "query records JSONL")
      ->required();
  cmd->add_option("--vectors", *vectors_path, "VEC1 file for vec_row records");
  cmd->add_option("--nn", *nn, "neighbors to average");
  cmd->add_option("--out", *out_path, "output CSV")->required();
  cmd->callback([=]() {
    GixFile gix = read_gix(*index_path);
    GeoIndex index = gix.build();
    std::vector<GeoRecord> queries =
        load_queries(*queries_path, *vectors_path, gix);
    std::ostringstream csv;
    csv << "id,pred_lat,pred_lon,neighbors\n";
    for (const GeoRecord& q : queries) {
      GeoEstimate est = localize(q.embedding, index, *nn);
      csv << q.id << ',' << fmt6(est.predicted.lat) << ','
          << fmt6(est.predicted.lon) << ',';
      for (std::size_t i = 0; i < est.neighbors.size(); ++i) {
        if (i > 0) csv << ';';
        csv << index.record(est.neighbors[i].id).id;
      }
      csv << '\n';
    }
    write_text(*out_path, csv.str());
  });
}

void add_evaluate(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "evaluate", "Score localization accuracy on labeled queries");
  auto index_path = std::make_shared<std::string>();
  auto test_path = std::make_shared<std::string>();
  auto vectors_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto config_path = std::make_shared<std::string>();
  auto nn = std::make_shared<std::vector<std::size_t>>(kDefaultNnChoices);
  cmd->add_option("--index", *index_path, "index file")->required();
  cmd->add_option("--test", *test_path, "test records JSONL")->required();
  cmd->add_option("--vectors", *vectors_path, "VEC1 file for vec_row records");
  auto nn_opt = cmd->add_option("--nn", *nn, "neighbor counts to evaluate")
                    ->delimiter(',');
  cmd->add_option("--out", *out_path, "output CSV")->required();
  cmd->add_option("--config", *config_path, "defaults file (JSON)");
  cmd->callback([=]() {
    RunConfig cfg = maybe_config(*config_path);
    GixFile gix = read_gix(*index_path);
    GeoIndex index = gix.build();
    std::vector<GeoRecord> queries =
        load_queries(*test_path, *vectors_path, gix);
    std::vector<std::size_t> nn_choices = resolve(nn_opt, *nn, cfg.eval_nn);
    EvalReport report = evaluate(queries, index, nn_choices);
    if (report.overlapping_ids > 0)
      std::cerr << "note: " << report.overlapping_ids
                << " query id(s) also exist in the index\n";
    write_text(*out_path, eval_report_csv(report, gix.descriptor()));
  });
}

struct SvmFlags {
  std::shared_ptr<double> c = std::make_shared<double>(1.0);
  std::shared_ptr<std::size_t> epochs = std::make_shared<std::size_t>(300);
  std::shared_ptr<double> tol = std::make_shared<double>(1e-9);
  std::shared_ptr<std::string> neg_ratio =
      std::make_shared<std::string>("max");
  CLI::Option* c_opt = nullptr;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* ratio_opt = nullptr;

  void add(CLI::App* cmd) {
    c_opt = cmd->add_option("--C", *c, "SVM regularization weight");
    epochs_opt = cmd->add_option("--epochs", *epochs, "max training epochs");
    tol_opt = cmd->add_option("--tol", *tol, "objective improvement cutoff");
    ratio_opt = cmd->add_option("--neg-ratio", *neg_ratio,
                                "negatives per positive, or 'max'");
  }

  TrainConfig build(const RunConfig& cfg, std::uint64_t seed) const {
    TrainConfig tc;
    tc.C = resolve(c_opt, *c, cfg.svm_c);
    tc.epochs = resolve(epochs_opt, *epochs, cfg.svm_epochs);
    tc.tol = resolve(tol_opt, *tol, cfg.svm_tol);
    tc.neg_ratio = parse_neg_ratio(resolve(ratio_opt, *neg_ratio, cfg.svm_neg_ratio));
    tc.seed = seed;
    return tc;
  }
};

void add_train(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "train", "Train one-versus-many linear concept models");
  auto features_path = std::make_shared<std::string>();
  auto vectors_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto selection_path = std::make_shared<std::string>();
  auto config_path = std::make_shared<std::string>();
  auto concepts = std::make_shared<std::vector<std::string>>();
  auto select_k = std::make_shared<bool>(false);
  auto folds = std::make_shared<std::size_t>(5);
  auto seed = std::make_shared<std::uint64_t>(0);
  auto svm = std::make_shared<SvmFlags>();
  cmd->add_option("--features", *features_path, "labeled features JSONL")
      ->required();
  cmd->add_option("--vectors", *vectors_path, "VEC1 file for vec_row records");
  cmd->add_option("--concept", *concepts, "concept(s) to train")->required();
  svm->add(cmd);
  cmd->add_flag("--select-k", *select_k,
                "pick the negative ratio by cross-validated F1");
  cmd->add_option("--folds", *folds, "cross-validation folds");
  auto seed_opt = cmd->add_option("--seed", *seed, "sampling seed");
  cmd->add_option("--out", *out_path, "output models JSON")->required();
  cmd->add_option("--selection-out", *selection_path,
                  "ratio selection report CSV (with --select-k)");
  cmd->add_option("--config", *config_path, "defaults file (JSON)");
  cmd->callback([=]() {
    RunConfig cfg = maybe_config(*config_path);
    std::optional<VectorSet> vs;
    std::vector<LabeledFeature> features =
        read_features_jsonl(*features_path, load_vectors(*vectors_path, vs));
    TrainConfig tc = svm->build(cfg, need_seed(seed_opt, *seed, cfg));

    std::vector<LinearModel> models;
    std::ostringstream selection;
    selection << "concept,ratio,mean_f1,chosen\n";
    for (const std::string& concept_name : *concepts) {
      TrainConfig per = tc;
      if (*select_k) {
        RatioSelection sel =
            select_k_by_cv(concept_name, features, tc, kDefaultRatioGrid,
                           *folds);
        per.neg_ratio = sel.best;
        for (const auto& [ratio, f1] : sel.mean_f1)
          selection << concept_name << ',' << to_string(ratio) << ','
                    << fmt6(f1) << ',' << (ratio == sel.best ? 1 : 0) << '\n';
        std::cerr << "note: " << concept_name << " trains with ratio "
                  << to_string(sel.best) << '\n';
      }
      models.push_back(train_one_vs_many(concept_name, features, per));
    }
    if (!selection_path->empty()) {
      if (!*select_k)
        throw ValidationError("--selection-out needs --select-k");
      write_text(*selection_path, selection.str());
    }
    write_models_json(*out_path, models);
  });
}

void add_rates(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "rates", "Per-concept TP/TN/FP/FN rates and balanced accuracy");
  auto models_path = std::make_shared<std::string>();
  auto test_path = std::make_shared<std::string>();
  auto vectors_path = std::make_shared<std::string>();
  auto predictions_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  cmd->add_option("--models", *models_path, "models JSON");
  cmd->add_option("--test", *test_path, "labeled features JSONL");
  cmd->add_option("--vectors", *vectors_path, "VEC1 file for vec_row records");
  cmd->add_option("--predictions", *predictions_path,
                  "pre-computed predictions CSV (concept,truth,predicted)");
  cmd->add_option("--out", *out_path, "output CSV")->required();
  cmd->callback([=]() {
    const bool from_predictions = !predictions_path->empty();
    const bool from_models = !models_path->empty() || !test_path->empty();
    if (from_predictions == from_models)
      throw ValidationError(
          "pass either --predictions or both --models and --test");

    std::vector<std::pair<std::string, BinaryRates>> rows;
    if (from_predictions) {
      PredictionSet set = read_predictions_csv(*predictions_path);
      for (std::size_t i = 0; i < set.concepts.size(); ++i)
        rows.emplace_back(set.concepts[i],
                          binary_rates(set.truth[i], set.predicted[i]));
    } else {
      if (models_path->empty() || test_path->empty())
        throw ValidationError("--models and --test go together");
      std::vector<LinearModel> models = read_models_json(*models_path);
      std::optional<VectorSet> vs;
      std::vector<LabeledFeature> test =
          read_features_jsonl(*test_path, load_vectors(*vectors_path, vs));
      for (const LinearModel& model : models) {
        std::vector<bool> truth, predicted;
        for (const LabeledFeature& item : test) {
          truth.push_back(item.labels.contains(model.concept_name));
          predicted.push_back(model.score(item.features) > 0.0);
        }
        rows.emplace_back(model.concept_name, binary_rates(truth, predicted));
      }
    }
    write_text(*out_path, rates_report_csv(rows));
  });
}

void add_confusion(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "confusion", "Confusion matrix of argmax predictions");
  auto models_path = std::make_shared<std::string>();
  auto test_path = std::make_shared<std::string>();
  auto vectors_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  cmd->add_option("--models", *models_path, "models JSON")->required();
  cmd->add_option("--test", *test_path, "labeled features JSONL")->required();
  cmd->add_option("--vectors", *vectors_path, "VEC1 file for vec_row records");
  cmd->add_option("--out", *out_path, "output CSV")->required();
  cmd->callback([=]() {
    std::vector<LinearModel> models = read_models_json(*models_path);
    std::optional<VectorSet> vs;
    std::vector<LabeledFeature> test =
        read_features_jsonl(*test_path, load_vectors(*vectors_path, vs));
    write_text(*out_path, confusion_csv(confusion(models, test)));
  });
}

void add_expand(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "expand", "Expand a query concept over a concept bank");
  auto taxonomy_path = std::make_shared<std::string>();
  auto lexicon_path = std::make_shared<std::string>();
  auto query = std::make_shared<std::string>();
  auto bank_csv = std::make_shared<std::string>();
  auto bank_file = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto k = std::make_shared<std::size_t>(kDefaultExpansionK);
  cmd->add_option("--taxonomy", *taxonomy_path,
                  "taxonomy CSV for Wu-Palmer similarity");
  cmd->add_option("--lexicon", *lexicon_path,
                  "embedding lexicon for cosine similarity");
  cmd->add_option("--query", *query, "query concept")->required();
  cmd->add_option("--bank", *bank_csv, "comma-separated concept bank");
  cmd->add_option("--bank-file", *bank_file, "concept bank, one per line");
  cmd->add_option("--k", *k, "results to keep");
  cmd->add_option("--out", *out_path, "output CSV")->required();
  cmd->callback([=]() {
    if (taxonomy_path->empty() == lexicon_path->empty())
      throw ValidationError("pass exactly one of --taxonomy or --lexicon");

    std::vector<std::string> bank;
    if (!bank_csv->empty()) {
      std::stringstream ss(*bank_csv);
      std::string cell;
      while (std::getline(ss, cell, ',')) bank.push_back(cell);
    }
    if (!bank_file->empty()) {
      std::ifstream in(*bank_file);
      if (!in)
        throw ValidationError("cannot open bank file: " + *bank_file);
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) bank.push_back(line);
      }
    }
    if (bank.empty())
      throw ValidationError("the concept bank is empty; pass --bank or "
                            "--bank-file");

    ExpansionResult result;
    if (!taxonomy_path->empty()) {
      Taxonomy tax = Taxonomy::load_csv(*taxonomy_path);
      result = expand_query(*query, bank, tax, *k);
    } else {
      Lexicon lex = Lexicon::load_text(*lexicon_path);
      result = expand_query(*query, bank, lex, *k);
    }
    for (const std::string& s : result.skipped)
      std::cerr << "note: skipped unresolvable bank entry '" << s << "'\n";
    std::ostringstream csv;
    csv << "concept,similarity\n";
    for (const ScoredConcept& sc : result.ranked)
      csv << sc.name << ',' << fmt6(sc.similarity) << '\n';
    write_text(*out_path, csv.str());
  });
}

void add_simulate_al(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "simulate-al", "Simulate the annotate-train-select loop");
  auto pool_path = std::make_shared<std::string>();
  auto test_path = std::make_shared<std::string>();
  auto pool_vectors = std::make_shared<std::string>();
  auto test_vectors = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto compare_path = std::make_shared<std::string>();
  auto config_path = std::make_shared<std::string>();
  auto concept_name = std::make_shared<std::string>();
  auto strategy = std::make_shared<std::string>();
  auto rounds = std::make_shared<std::size_t>(10);
  auto seed_count = std::make_shared<std::size_t>(20);
  auto batch = std::make_shared<std::size_t>(30);
  auto budget = std::make_shared<std::size_t>(250);
  auto threshold = std::make_shared<double>(0.9);
  auto seed = std::make_shared<std::uint64_t>(0);
  auto svm = std::make_shared<SvmFlags>();
  auto draw_s = std::make_shared<double>(3.6);
  auto accept_s = std::make_shared<double>(1.0);
  auto delete_s = std::make_shared<double>(1.0);
  auto modify_s = std::make_shared<double>(3.0);
  auto train_s = std::make_shared<double>(89.0);
  auto boxes = std::make_shared<double>(1.3);

  cmd->add_option("--pool", *pool_path, "unlabeled pool JSONL")->required();
  cmd->add_option("--test", *test_path, "held-out test JSONL")->required();
  cmd->add_option("--pool-vectors", *pool_vectors,
                  "VEC1 file for pool vec_row records");
  cmd->add_option("--test-vectors", *test_vectors,
                  "VEC1 file for test vec_row records");
  cmd->add_option("--concept", *concept_name, "target concept")->required();
  cmd->add_option("--strategy", *strategy,
                  "random | uncertainty | high-confidence");
  auto rounds_opt = cmd->add_option("--rounds", *rounds, "annotation rounds");
  auto seedcnt_opt =
      cmd->add_option("--seed-count", *seed_count, "seed round size");
  auto batch_opt = cmd->add_option("--batch", *batch, "items per round");
  auto budget_opt = cmd->add_option("--budget-images", *budget,
                                    "image budget for the comparison");
  auto thresh_opt = cmd->add_option("--map-threshold", *threshold,
                                    "mAP threshold for the comparison");
  svm->add(cmd);
  auto draw_opt = cmd->add_option("--draw-s", *draw_s, "seconds to draw a box");
  auto accept_opt =
      cmd->add_option("--accept-s", *accept_s, "seconds to accept a proposal");
  auto delete_opt =
      cmd->add_option("--delete-s", *delete_s, "seconds to delete a proposal");
  auto modify_opt =
      cmd->add_option("--modify-s", *modify_s, "seconds to modify a proposal");
  auto train_opt = cmd->add_option("--train-s", *train_s,
                                   "seconds per retraining round");
  auto boxes_opt =
      cmd->add_option("--boxes-per-image", *boxes, "mean boxes per image");
  auto seed_opt = cmd->add_option("--seed", *seed, "run seed");
  cmd->add_option("--out", *out_path, "history CSV (needs --strategy)");
  cmd->add_option("--compare-out", *compare_path,
                  "strategy comparison CSV (runs all strategies)");
  cmd->add_option("--config", *config_path, "defaults file (JSON)");
  cmd->callback([=]() {
    RunConfig cfg = maybe_config(*config_path);
    if (out_path->empty() && compare_path->empty())
      throw ValidationError("pass --out (with --strategy) or --compare-out");
    if (!out_path->empty() && strategy->empty())
      throw ValidationError("--out needs --strategy");

    std::optional<VectorSet> pv, tv;
    std::vector<LabeledFeature> pool =
        read_features_jsonl(*pool_path, load_vectors(*pool_vectors, pv));
    std::vector<LabeledFeature> test =
        read_features_jsonl(*test_path, load_vectors(*test_vectors, tv));
    ActiveSimulation sim(*concept_name, std::move(pool), std::move(test));

    SimOptions opt;
    opt.rounds = resolve(rounds_opt, *rounds, cfg.al_rounds);
    opt.seed_count = resolve(seedcnt_opt, *seed_count, cfg.al_seed_count);
    opt.batch = resolve(batch_opt, *batch, cfg.al_batch);
    opt.cost.draw_s = resolve(draw_opt, *draw_s, cfg.cost_draw_s);
    opt.cost.accept_s = resolve(accept_opt, *accept_s, cfg.cost_accept_s);
    opt.cost.delete_s = resolve(delete_opt, *delete_s, cfg.cost_delete_s);
    opt.cost.modify_s = resolve(modify_opt, *modify_s, cfg.cost_modify_s);
    opt.cost.train_s = resolve(train_opt, *train_s, cfg.cost_train_s);
    opt.cost.boxes_per_image = resolve(boxes_opt, *boxes, cfg.cost_boxes_per_image);
    opt.train = svm->build(cfg, need_seed(seed_opt, *seed, cfg));

    if (!out_path->empty()) {
      auto history = sim.run(parse_strategy(*strategy), opt);
      write_text(*out_path, history_csv(history));
    }
    if (!compare_path->empty()) {
      std::size_t image_budget = resolve(budget_opt, *budget, cfg.al_budget_images);
      double map_threshold = resolve(thresh_opt, *threshold, cfg.al_map_threshold);
      std::vector<StrategySummary> rows;
      for (Strategy s : {Strategy::kRandom, Strategy::kUncertainty,
                         Strategy::kHighConfidence}) {
        auto history = sim.run(s, opt);
        rows.push_back(
            summarize(s, history, image_budget, map_threshold, opt.cost));
      }
      write_text(*compare_path, comparison_csv(rows));
    }
  });
}

int run(int argc, char** argv) {
  CLI::App app{"locus: geographic sampling, quantized retrieval, concept "
               "classifiers, and annotation-loop simulation"};
  app.require_subcommand(1);
  add_osm_extract(app);
  add_sample(app);
  add_split(app);
  add_synth(app);
  add_index(app);
  add_query(app);
  add_evaluate(app);
  add_train(app);
  add_rates(app);
  add_confusion(app);
  add_expand(app);
  add_simulate_al(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  return 0;
}

}  // namespace
}  // namespace locus::cli

int main(int argc, char** argv) {
  try {
    return locus::cli::run(argc, argv);
  } catch (const locus::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 2;
  } catch (const locus::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const locus::InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
}
