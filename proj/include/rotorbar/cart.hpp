#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "rotorbar/dataset.hpp"
#include "rotorbar/rng.hpp"

namespace rotorbar {

struct ClassCounts {
  std::int64_t healthy = 0;
  std::int64_t faulty = 0;

  std::int64_t total() const noexcept { return healthy + faulty; }
  /// Fraction faulty.
  double probability() const noexcept {
    return static_cast<double>(faulty) / static_cast<double>(total());
  }
  void add(Condition c) noexcept { (c == Condition::Faulty ? faulty : healthy) += 1; }
  ClassCounts operator+(const ClassCounts& o) const noexcept {
    return {healthy + o.healthy, faulty + o.faulty};
  }
  ClassCounts operator-(const ClassCounts& o) const noexcept {
    return {healthy - o.healthy, faulty - o.faulty};
  }
  bool operator==(const ClassCounts&) const = default;
};

/// 1 - sum_k (n_k / n)^2. Throws ErrorKind::EmptyNode for an empty node.
double gini(const ClassCounts& counts);

/// G(parent) - (n_L / n) G(left) - (n_R / n) G(right), parent = left + right.
double impurity_decrease(const ClassCounts& left, const ClassCounts& right);

struct TreeFitConfig {
  /// Features examined per split; nullopt examines all of them.
  std::optional<std::size_t> max_features_per_split;
  std::size_t min_samples_split = 2;
  std::uint64_t rng_seed = 0;
};

/// Flat tree node. Decision nodes have feature >= 0 and route
/// `x[feature] <= threshold` to `left`. Every node keeps the class counts of
/// the training rows that reached it.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  ClassCounts counts;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

/// Best Gini split of `rows` over `candidate_features`. Thresholds are
/// midpoints between consecutive distinct values. Splits are compared
/// exactly (integer arithmetic on the class counts), ties going to the
/// lowest feature index and then the lowest threshold. Returns nullopt when
/// no split strictly decreases impurity.
std::optional<SplitCandidate> best_split(const Dataset& data, std::span<const std::size_t> rows,
                                         std::span<const std::size_t> candidate_features);

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  /// Edges on the longest root-to-leaf path; 0 for a single leaf.
  std::size_t depth() const;

  /// Leaf reached by `x`. Throws ErrorKind::FeatureArity on a size mismatch.
  const TreeNode& leaf_for(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

  bool operator==(const DecisionTree&) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

/// `k` distinct indices drawn uniformly from [0, p), sorted ascending. Uses
/// no randomness when k == p.
std::vector<std::size_t> sample_features(std::size_t p, std::size_t k, Rng& rng);

/// Grows an unpruned tree on `rows` (repeats allowed). Per-node feature
/// subsets are drawn from `rng`.
DecisionTree fit_tree(const Dataset& data, std::span<const std::size_t> rows,
                      const TreeFitConfig& cfg, Rng& rng);
DecisionTree fit_tree(const Dataset& data, std::span<const std::size_t> rows,
                      const TreeFitConfig& cfg);
DecisionTree fit_tree(const Dataset& data, const TreeFitConfig& cfg);

/// Probability of Faulty at the leaf reached by `x`.
double predict_tree(const DecisionTree& tree, std::span<const double> x);

/// Weighted impurity decrease per feature, normalized to sum 1. All zeros
/// for a single-leaf tree.
std::vector<double> tree_importances(const DecisionTree& tree, std::size_t n_features);

}  // namespace rotorbar
