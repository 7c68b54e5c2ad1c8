#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rotorbar/cart.hpp"
#include "rotorbar/dataset.hpp"

namespace rotorbar {

/// Number of candidate features per split.
struct MaxFeatures {
  enum class Mode { Sqrt, All, Explicit };
  Mode mode = Mode::Sqrt;
  std::size_t k = 0;

  static MaxFeatures sqrt() { return {Mode::Sqrt, 0}; }
  static MaxFeatures all() { return {Mode::All, 0}; }
  static MaxFeatures explicit_k(std::size_t k) { return {Mode::Explicit, k}; }

  /// ceil(sqrt(p)) for Sqrt, p for All. Throws on k outside [1, p].
  std::size_t resolve(std::size_t p) const;
  bool operator==(const MaxFeatures&) const = default;
};

struct ForestConfig {
  std::size_t n_trees = 100;
  MaxFeatures max_features = MaxFeatures::sqrt();
  std::uint64_t rng_seed = 0;
  double decision_threshold = 0.5;
  std::size_t min_samples_split = 2;
  /// Test hook: false fits every tree on the full dataset (empty OOB sets).
  bool bootstrap = true;
  /// Worker threads for fitting; 0 picks hardware concurrency. Output does
  /// not depend on it.
  std::size_t threads = 1;

  void validate() const;
};

struct ForestModel {
  ForestConfig config;
  std::vector<std::string> feature_names;
  std::vector<DecisionTree> trees;
  /// Sorted row indices never drawn for each tree.
  std::vector<std::vector<std::size_t>> oob_rows;
  /// NaN when every row was in-bag for every tree.
  double oob_error = 0.0;
  std::vector<double> importances;

  std::size_t n_features() const noexcept { return feature_names.size(); }
};

/// Stream used for tree `tree_index`: bootstrap draws first, then the
/// per-split feature samples.
Rng tree_rng(std::uint64_t rng_seed, std::size_t tree_index);

/// n draws with replacement from [0, n).
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng);

ForestModel fit_forest(const Dataset& data, const ForestConfig& cfg);

struct ForestPrediction {
  double probability = 0.0;
  Condition label = Condition::Healthy;
};

/// Mean of per-tree leaf probabilities; Faulty iff probability >= threshold.
ForestPrediction predict_forest(const ForestModel& model, std::span<const double> x);

/// Leaf argmax per tree (leaf ties vote Faulty), then the modal vote; a tie
/// across trees is Faulty.
Condition majority_vote(const ForestModel& model, std::span<const double> x);

/// Vote of one tree for `x`, as used by majority_vote and the OOB estimate.
Condition tree_vote(const DecisionTree& tree, std::span<const double> x);

struct ImportanceRanking {
  std::vector<std::pair<std::string, double>> entries;
  /// False when no tree has a split; the scores are then all zero.
  bool informative = false;
};

/// Descending by score, ties in feature order.
ImportanceRanking forest_importances(const ForestModel& model);

nlohmann::json to_json(const ForestConfig& cfg);
ForestConfig forest_config_from_json(const nlohmann::json& j, ForestConfig base = {});

nlohmann::json to_json(const ForestModel& model);
ForestModel forest_from_json(const nlohmann::json& j);

}  // namespace rotorbar
