#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace locus::cli {

// Optional defaults file. Flags always win over config values, config values
// win over built-in defaults. Unknown keys are rejected so typos fail loudly
// instead of silently running with defaults.
struct RunConfig {
  std::optional<std::uint64_t> seed;

  std::optional<std::size_t> pq_m;
  std::optional<std::size_t> pq_k_centroids;
  std::optional<std::size_t> pq_train_iters;

  std::optional<double> svm_c;
  std::optional<std::size_t> svm_epochs;
  std::optional<double> svm_tol;
  std::optional<std::string> svm_neg_ratio;

  std::optional<double> cost_draw_s;
  std::optional<double> cost_accept_s;
  std::optional<double> cost_delete_s;
  std::optional<double> cost_modify_s;
  std::optional<double> cost_train_s;
  std::optional<double> cost_boxes_per_image;

  std::optional<std::size_t> al_rounds;
  std::optional<std::size_t> al_seed_count;
  std::optional<std::size_t> al_batch;
  std::optional<std::size_t> al_budget_images;
  std::optional<double> al_map_threshold;

  std::optional<std::vector<std::size_t>> eval_nn;
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace locus::cli
