#include "run_config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "locus/errors.hpp"

namespace locus::cli {

namespace {

using nlohmann::json;

// Pulls a typed value out of a section and errors on anything unexpected.
class Section {
 public:
  Section(const json& obj, std::string name)
      : obj_(obj), name_(std::move(name)) {
    if (!obj.is_object())
      throw ValidationError("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ValidationError("config key '" + name_ + "." + key +
                            "' has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.contains(key))
        throw ValidationError("unknown config key '" + name_ + "." + key +
                              "'");
  }

 private:
  const json& obj_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  RunConfig cfg;
  Section root(doc, "config");
  root.get("seed", cfg.seed);

  if (const json* pq = root.child("pq")) {
    Section s(*pq, "pq");
    s.get("m", cfg.pq_m);
    s.get("k_centroids", cfg.pq_k_centroids);
    s.get("train_iters", cfg.pq_train_iters);
    s.finish();
  }
  if (const json* svm = root.child("svm")) {
    Section s(*svm, "svm");
    s.get("C", cfg.svm_c);
    s.get("epochs", cfg.svm_epochs);
    s.get("tol", cfg.svm_tol);
    s.get("neg_ratio", cfg.svm_neg_ratio);
    s.finish();
  }
  if (const json* cost = root.child("cost")) {
    Section s(*cost, "cost");
    s.get("draw_s", cfg.cost_draw_s);
    s.get("accept_s", cfg.cost_accept_s);
    s.get("delete_s", cfg.cost_delete_s);
    s.get("modify_s", cfg.cost_modify_s);
    s.get("train_s", cfg.cost_train_s);
    s.get("boxes_per_image", cfg.cost_boxes_per_image);
    s.finish();
  }
  if (const json* al = root.child("al")) {
    Section s(*al, "al");
    s.get("rounds", cfg.al_rounds);
    s.get("seed_count", cfg.al_seed_count);
    s.get("batch", cfg.al_batch);
    s.get("budget_images", cfg.al_budget_images);
    s.get("map_threshold", cfg.al_map_threshold);
    s.finish();
  }
  if (const json* ev = root.child("eval")) {
    Section s(*ev, "eval");
    s.get("nn", cfg.eval_nn);
    s.finish();
  }
  root.finish();
  return cfg;
}

}  // namespace locus::cli
