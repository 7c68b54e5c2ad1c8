#include "rotorbar/cart.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "rotorbar/errors.hpp"

namespace rotorbar {

using nlohmann::json;

double gini(const ClassCounts& counts) {
  const auto n = counts.total();
  if (n <= 0) throw Error(ErrorKind::EmptyNode, "gini of an empty node");
  const double ph = static_cast<double>(counts.healthy) / static_cast<double>(n);
  const double pf = static_cast<double>(counts.faulty) / static_cast<double>(n);
  return 1.0 - (ph * ph + pf * pf);
}

double impurity_decrease(const ClassCounts& left, const ClassCounts& right) {
  const ClassCounts parent = left + right;
  const auto n = static_cast<double>(parent.total());
  const auto nl = static_cast<double>(left.total());
  const auto nr = static_cast<double>(right.total());
  return gini(parent) - (nl / n) * gini(left) - (nr / n) * gini(right);
}

namespace {

__extension__ typedef __int128 Wide;

// Sum over children of (sum_k n_k^2) / n_child, kept as an exact fraction.
// Maximizing it is equivalent to maximizing the impurity decrease.
struct Purity {
  Wide num = 0;
  Wide den = 1;

  static Purity of_split(const ClassCounts& l, const ClassCounts& r) {
    const Wide sl = Wide(l.healthy) * l.healthy + Wide(l.faulty) * l.faulty;
    const Wide sr = Wide(r.healthy) * r.healthy + Wide(r.faulty) * r.faulty;
    return {sl * r.total() + sr * l.total(), Wide(l.total()) * r.total()};
  }
  static Purity of_node(const ClassCounts& c) {
    return {Wide(c.healthy) * c.healthy + Wide(c.faulty) * c.faulty, Wide(c.total())};
  }
  bool operator>(const Purity& o) const { return num * o.den > o.num * den; }
};

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // Adjacent doubles: keep the threshold strictly below `hi`.
  return mid < hi ? mid : lo;
}

struct ValueLabel {
  double value;
  Condition label;
};

}  // namespace

std::optional<SplitCandidate> best_split(const Dataset& data, std::span<const std::size_t> rows,
                                         std::span<const std::size_t> candidate_features) {
  if (rows.size() < 2 || candidate_features.empty()) return std::nullopt;

  ClassCounts parent;
  for (std::size_t r : rows) parent.add(data.label(r));
  const Purity parent_purity = Purity::of_node(parent);

  std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());

  std::optional<SplitCandidate> best;
  Purity best_purity = parent_purity;
  ClassCounts best_left;

  std::vector<ValueLabel> column(rows.size());
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      column[i] = {data.at(rows[i], f), data.label(rows[i])};
    std::sort(column.begin(), column.end(),
              [](const ValueLabel& a, const ValueLabel& b) { return a.value < b.value; });

    ClassCounts left;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      left.add(column[i].label);
      if (!(column[i].value < column[i + 1].value)) continue;
      const Purity p = Purity::of_split(left, parent - left);
      if (p > best_purity) {
        best_purity = p;
        best_left = left;
        best = SplitCandidate{f, midpoint(column[i].value, column[i + 1].value), 0.0};
      }
    }
  }
  if (best) best->impurity_decrease = impurity_decrease(best_left, parent - best_left);
  return best;
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features)
    : nodes_(std::move(nodes)), n_features_(n_features) {}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes_[static_cast<std::size_t>(id)];
    deepest = std::max(deepest, d);
    if (!n.is_leaf()) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return deepest;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  if (x.size() != n_features_)
    throw Error(ErrorKind::FeatureArity, "tree expects " + std::to_string(n_features_) +
                                             " features, got " + std::to_string(x.size()));
  const TreeNode* node = &nodes_.front();
  while (!node->is_leaf()) {
    const auto next = x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                                     : node->right;
    node = &nodes_[static_cast<std::size_t>(next)];
  }
  return *node;
}

bool DecisionTree::operator==(const DecisionTree& o) const {
  if (n_features_ != o.n_features_ || nodes_.size() != o.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    const auto& b = o.nodes_[i];
    if (a.feature != b.feature || a.left != b.left || a.right != b.right || !(a.counts == b.counts))
      return false;
    if (!a.is_leaf() && a.threshold != b.threshold) return false;
  }
  return true;
}

namespace {

json node_to_json(const std::vector<TreeNode>& nodes, std::int32_t id) {
  const TreeNode& n = nodes[static_cast<std::size_t>(id)];
  if (n.is_leaf()) return json{{"counts", {n.counts.healthy, n.counts.faulty}}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"left", node_to_json(nodes, n.left)},
              {"right", node_to_json(nodes, n.right)}};
}

std::int32_t node_from_json(const json& j, std::vector<TreeNode>& nodes, std::size_t n_features) {
  const auto id = static_cast<std::int32_t>(nodes.size());
  nodes.emplace_back();
  if (j.contains("counts")) {
    const auto& c = j.at("counts");
    ClassCounts counts{c.at(0).get<std::int64_t>(), c.at(1).get<std::int64_t>()};
    if (counts.healthy < 0 || counts.faulty < 0 || counts.total() < 1)
      throw Error(ErrorKind::Format, "leaf counts must be non-negative with a positive total");
    nodes[static_cast<std::size_t>(id)].counts = counts;
    return id;
  }
  const auto feature = j.at("feature").get<std::int32_t>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= n_features)
    throw Error(ErrorKind::Format, "split feature index out of range");
  const double threshold = j.at("threshold").get<double>();
  const auto left = node_from_json(j.at("left"), nodes, n_features);
  const auto right = node_from_json(j.at("right"), nodes, n_features);
  TreeNode& n = nodes[static_cast<std::size_t>(id)];
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  n.counts = nodes[static_cast<std::size_t>(left)].counts + nodes[static_cast<std::size_t>(right)].counts;
  return id;
}

}  // namespace

json DecisionTree::to_json() const {
  return json{{"n_features", n_features_}, {"root", node_to_json(nodes_, 0)}};
}

DecisionTree DecisionTree::from_json(const json& j) {
  try {
    const auto p = j.at("n_features").get<std::size_t>();
    std::vector<TreeNode> nodes;
    node_from_json(j.at("root"), nodes, p);
    return DecisionTree(std::move(nodes), p);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("tree: ") + e.what());
  }
}

std::vector<std::size_t> sample_features(std::size_t p, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(p);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (k >= p) return pool;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, p - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeFitConfig& cfg, Rng& rng)
      : data_(data), cfg_(cfg), rng_(rng), p_(data.features()) {
    const std::size_t p = data.features();
    k_ = cfg.max_features_per_split.value_or(p);
    if (k_ < 1 || k_ > p)
      throw Error(ErrorKind::Configuration, "max_features_per_split must lie in [1, " +
                                                std::to_string(p) + "]");
  }

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(rows);
    return std::move(nodes_);
  }

 private:
  std::int32_t grow(std::span<std::size_t> rows) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    ClassCounts counts;
    for (std::size_t r : rows) counts.add(data_.label(r));
    nodes_.back().counts = counts;

    if (rows.size() < cfg_.min_samples_split || counts.healthy == 0 || counts.faulty == 0)
      return id;
    const auto features = sample_features(p_, k_, rng_);
    const auto split = best_split(data_, rows, features);
    if (!split) return id;

    const auto mid = std::stable_partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return data_.at(r, split->feature) <= split->threshold;
    });
    const auto n_left = static_cast<std::size_t>(mid - rows.begin());
    const auto left = grow(rows.subspan(0, n_left));
    const auto right = grow(rows.subspan(n_left));

    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<std::int32_t>(split->feature);
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const Dataset& data_;
  const TreeFitConfig& cfg_;
  Rng& rng_;
  std::size_t p_;
  std::size_t k_ = 0;
  std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree fit_tree(const Dataset& data, std::span<const std::size_t> rows,
                      const TreeFitConfig& cfg, Rng& rng) {
  if (rows.empty()) throw Error(ErrorKind::EmptyDataset, "cannot fit a tree on zero rows");
  if (data.features() == 0) throw Error(ErrorKind::EmptyDataset, "dataset has no features");
  TreeBuilder builder(data, cfg, rng);
  return DecisionTree(builder.build({rows.begin(), rows.end()}), data.features());
}

DecisionTree fit_tree(const Dataset& data, std::span<const std::size_t> rows,
                      const TreeFitConfig& cfg) {
  Rng rng = make_rng(cfg.rng_seed);
  return fit_tree(data, rows, cfg, rng);
}

DecisionTree fit_tree(const Dataset& data, const TreeFitConfig& cfg) {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(data, rows, cfg);
}

double predict_tree(const DecisionTree& tree, std::span<const double> x) {
  return tree.leaf_for(x).counts.probability();
}

std::vector<double> tree_importances(const DecisionTree& tree, std::size_t n_features) {
  std::vector<double> imp(n_features, 0.0);
  const auto& nodes = tree.nodes();
  if (nodes.empty()) return imp;
  const auto n_root = static_cast<double>(nodes.front().counts.total());
  for (const TreeNode& n : nodes) {
    if (n.is_leaf()) continue;
    const auto& l = nodes[static_cast<std::size_t>(n.left)].counts;
    const auto& r = nodes[static_cast<std::size_t>(n.right)].counts;
    imp.at(static_cast<std::size_t>(n.feature)) +=
        static_cast<double>(n.counts.total()) / n_root * impurity_decrease(l, r);
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0)
    for (double& v : imp) v /= total;
  return imp;
}

}  // namespace rotorbar
