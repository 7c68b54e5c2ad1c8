#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotorbar/baselines.hpp"
#include "rotorbar/dataset.hpp"
#include "rotorbar/forest.hpp"

namespace rotorbar {

/// Within each class the indices are shuffled with `seed`, then dealt
/// round-robin into k folds. Fold contents are sorted ascending.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const Condition> labels,
                                                       std::size_t k, std::uint64_t seed);

/// Rank AUC: P(faulty score > healthy score) with ties counted half.
double auc(std::span<const double> scores, std::span<const Condition> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// ROC polyline from (0,0) to (1,1), one vertex per distinct score.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Condition> labels);

/// Fraction of rows where (score >= threshold) matches label == Faulty.
double accuracy(std::span<const double> scores, std::span<const Condition> labels, double threshold);

/// Population mean and standard deviation (divisor n).
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> v);

using Scorer = std::function<double(std::span<const double>)>;
using Trainer = std::function<Scorer(const Dataset& train, std::size_t fold)>;

struct CvResult {
  std::vector<double> fold_auc;
  std::vector<double> fold_accuracy;
  /// Held-out score of every row.
  std::vector<double> scores;
};

/// Trains on all folds but one and scores the held-out fold, for each fold.
CvResult cross_validate(const Dataset& data, const std::vector<std::vector<std::size_t>>& folds,
                        const Trainer& trainer, double threshold);

struct FeatureSubset {
  std::string name;
  std::vector<std::string> features;
};

/// All13, Top3 and Top2.
std::vector<FeatureSubset> default_subsets();

struct EvalPlan {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  bool run_forest = true;
  std::vector<std::size_t> tree_counts = {10, 100, 200, 500, 1000};
  /// Forest used for the classifier comparison table.
  std::size_t comparison_trees = 100;
  /// Forest fitted on all rows for the importance ranking.
  std::size_t importance_trees = 100;
  /// Base forest settings; n_trees and rng_seed are set per cell.
  ForestConfig forest;
  std::vector<ClassifierSpec> classifiers = {
      ClassifierSpec::of(ClassifierKind::Cart), ClassifierSpec::of(ClassifierKind::GaussianNB),
      ClassifierSpec::of(ClassifierKind::Logistic), ClassifierSpec::of(ClassifierKind::Ridge),
      ClassifierSpec::of(ClassifierKind::SvmRbf)};
  std::vector<FeatureSubset> subsets = default_subsets();
  bool collect_roc = false;
  /// Cells evaluated concurrently; results do not depend on it.
  std::size_t threads = 1;

  /// Throws ErrorKind::Configuration.
  void validate() const;
};

nlohmann::json to_json(const EvalPlan& plan);
/// Partial override of `base`; unknown keys are rejected.
EvalPlan eval_plan_from_json(const nlohmann::json& j, EvalPlan base = {});

struct CellResult {
  /// "random_forest" or a classifier kind name.
  std::string classifier;
  std::string subset;
  std::optional<std::size_t> n_trees;
  std::vector<double> fold_auc;
  std::vector<double> fold_accuracy;
  MeanStd auc;
  MeanStd accuracy;
  std::optional<std::string> error;
  std::vector<RocPoint> roc;

  bool ok() const noexcept { return !error; }
};

struct EvalReport {
  EvalPlan plan;
  std::size_t rows = 0;
  std::size_t healthy = 0;
  std::size_t faulty = 0;
  /// Tree-count sweep, one cell per (tree count, subset).
  std::vector<CellResult> forest_cells;
  /// Classifier comparison, one cell per (classifier, subset); the forest
  /// row uses comparison_trees.
  std::vector<CellResult> classifier_cells;
  ImportanceRanking importances;

  const CellResult* find(std::string_view classifier, std::string_view subset,
                         std::optional<std::size_t> n_trees = std::nullopt) const;
};

EvalReport run_plan(const EvalPlan& plan, const Dataset& data);

/// Seed-derived forest settings shared by run_plan and select_features.
ForestConfig selection_forest(std::uint64_t seed, std::size_t n_trees = 100);

/// Top `k_top` feature names by importance of a 100-tree forest fitted on
/// every row.
std::vector<std::string> select_features(const Dataset& data, std::size_t k_top,
                                         std::uint64_t seed = 0);

}  // namespace rotorbar
