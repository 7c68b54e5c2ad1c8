#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rotorbar/cart.hpp"
#include "rotorbar/errors.hpp"

using namespace rotorbar;
using testutil::make;

namespace {

struct RandomSet {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::size_t p = 0;
};

// Small integer grids make ties between features and thresholds common.
RandomSet random_set(std::mt19937_64& g) {
  std::uniform_int_distribution<std::size_t> rows(2, 50), cols(1, 3);
  std::uniform_int_distribution<int> grid(0, 6), coin(0, 1);
  std::normal_distribution<double> z(0.0, 1.0);
  RandomSet s;
  s.p = cols(g);
  const std::size_t n = rows(g);
  const bool continuous = coin(g);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(s.p);
    for (auto& v : row) v = continuous ? z(g) : grid(g);
    s.x.push_back(row);
    s.y.push_back(coin(g));
  }
  s.y[0] = 0;
  s.y[1] = 1;
  return s;
}

// Walks the tree and collects the training rows reaching each node.
void route(const DecisionTree& t, const RandomSet& s, std::int32_t node, std::vector<std::size_t> rows,
           std::map<std::int32_t, std::vector<std::size_t>>& out) {
  out[node] = rows;
  const auto& n = t.nodes()[static_cast<std::size_t>(node)];
  if (n.is_leaf()) return;
  std::vector<std::size_t> l, r;
  for (auto i : rows) (s.x[i][static_cast<std::size_t>(n.feature)] <= n.threshold ? l : r).push_back(i);
  route(t, s, n.left, l, out);
  route(t, s, n.right, r, out);
}

}  // namespace

TEST(Gini, Values) {
  EXPECT_DOUBLE_EQ(gini({10, 0}), 0.0);
  EXPECT_DOUBLE_EQ(gini({5, 5}), 0.5);
  EXPECT_NEAR(gini({1, 3}), 0.375, 1e-15);
  EXPECT_THROW(gini({0, 0}), Error);
}

TEST(Gini, DecreaseOfPerfectSplit) {
  EXPECT_DOUBLE_EQ(impurity_decrease({5, 0}, {0, 5}), 0.5);
  EXPECT_NEAR(impurity_decrease({3, 1}, {1, 3}), 0.5 - 0.375, 1e-15);
  EXPECT_NEAR(impurity_decrease({2, 2}, {3, 3}), 0.0, 1e-15);
}

TEST(BestSplit, MidpointAndLowestFeatureOnTie) {
  // Both features separate perfectly; feature 0 must win.
  const auto d = make({{1, 10}, {2, 20}, {3, 30}, {4, 40}}, {0, 0, 1, 1});
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  const std::vector<std::size_t> feats{0, 1};
  const auto s = best_split(d, rows, feats);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
  EXPECT_DOUBLE_EQ(s->threshold, 2.5);
  EXPECT_DOUBLE_EQ(s->impurity_decrease, 0.5);

  const std::vector<std::size_t> only1{1};
  const auto s1 = best_split(d, rows, only1);
  ASSERT_TRUE(s1);
  EXPECT_EQ(s1->feature, 1u);
  EXPECT_DOUBLE_EQ(s1->threshold, 25.0);
}

TEST(BestSplit, NoneForConstantOrPure) {
  const auto d = make({{1}, {1}, {1}}, {0, 1, 0});
  const std::vector<std::size_t> rows{0, 1, 2};
  const std::vector<std::size_t> feats{0};
  EXPECT_FALSE(best_split(d, rows, feats));
}

TEST(Cart, MatchesExhaustiveOracle) {
  std::mt19937_64 g(4242);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_set(g);
    const auto d = make(s.x, s.y);
    const auto tree = fit_tree(d, TreeFitConfig{});
    std::vector<std::size_t> all(s.x.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::map<std::int32_t, std::vector<std::size_t>> reach;
    route(tree, s, 0, all, reach);
    ASSERT_EQ(reach.size(), tree.node_count());
    for (const auto& [id, rows] : reach) {
      const auto& node = tree.nodes()[static_cast<std::size_t>(id)];
      ClassCounts c;
      for (auto r : rows) c.add(s.y[r] ? Condition::Faulty : Condition::Healthy);
      EXPECT_EQ(node.counts, c);
      const auto best = oracle::best_split(s.x, s.y, rows, s.p);
      if (node.is_leaf()) {
        // Leaves are pure or admit no split that lowers impurity.
        EXPECT_TRUE(c.healthy == 0 || c.faulty == 0 || !best || best->decrease < 1e-12) << "trial " << trial;
        continue;
      }
      ASSERT_TRUE(best);
      EXPECT_GT(static_cast<double>(best->decrease), 1e-12);
      const auto& lc = tree.nodes()[static_cast<std::size_t>(node.left)].counts;
      const auto& rc = tree.nodes()[static_cast<std::size_t>(node.right)].counts;
      EXPECT_NEAR(impurity_decrease(lc, rc), static_cast<double>(best->decrease), 1e-12)
          << "trial " << trial << " node " << id;
      // Among all oracle splits at the maximum, ours is the first by (feature, threshold).
      oracle::Split first{};
      bool found = false;
      for (const auto& cand : oracle::all_splits(s.x, s.y, rows, s.p))
        if (std::fabs(static_cast<double>(cand.decrease - best->decrease)) < 1e-12 && !found) {
          first = cand;
          found = true;
        }
      EXPECT_EQ(static_cast<std::size_t>(node.feature), first.feature);
      EXPECT_DOUBLE_EQ(node.threshold, first.threshold);
    }
  }
}

namespace {

// Recursive descent over the serialized form, independent of leaf_for.
double json_predict(const nlohmann::json& node, const std::vector<double>& x) {
  if (node.contains("counts")) {
    const double h = node["counts"][0].get<double>(), f = node["counts"][1].get<double>();
    return f / (h + f);
  }
  const auto j = node["feature"].get<std::size_t>();
  return json_predict(x[j] <= node["threshold"].get<double>() ? node["left"] : node["right"], x);
}

// Returns (healthy, faulty) of the subtree and adds weighted decreases.
std::pair<double, double> json_importance(const nlohmann::json& node, std::vector<double>& acc) {
  if (node.contains("counts")) return {node["counts"][0].get<double>(), node["counts"][1].get<double>()};
  const auto l = json_importance(node["left"], acc);
  const auto r = json_importance(node["right"], acc);
  auto g = [](double h, double f) { return 1 - (h / (h + f)) * (h / (h + f)) - (f / (h + f)) * (f / (h + f)); };
  const double nl = l.first + l.second, nr = r.first + r.second, n = nl + nr;
  const double h = l.first + r.first, f = l.second + r.second;
  acc[node["feature"].get<std::size_t>()] += n * (g(h, f) - nl / n * g(l.first, l.second) - nr / n * g(r.first, r.second));
  return {h, f};
}

}  // namespace

TEST(Cart, PredictionMatchesPathTrace) {
  std::mt19937_64 g(77);
  std::normal_distribution<double> z(0.0, 1.5);
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto d = testutil::blobs(30, 4, 2, 0.7, seed);
    TreeFitConfig cfg;
    cfg.max_features_per_split = 2;
    cfg.rng_seed = seed;
    const auto tree = fit_tree(d, cfg);
    const auto j = tree.to_json();
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x(4);
      for (auto& v : x) v = z(g);
      EXPECT_EQ(predict_tree(tree, x), json_predict(j["root"], x));
    }
  }
}

TEST(Cart, ImportancesMatchNodeWalk) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto d = testutil::blobs(40, 3, 2, 0.8, seed + 100);
    const auto tree = fit_tree(d, TreeFitConfig{});
    std::vector<double> acc(3, 0.0);
    json_importance(tree.to_json()["root"], acc);
    double total = 0;
    for (double v : acc) total += v;
    const auto got = tree_importances(tree, 3);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(got[j], acc[j] / total, 1e-12);
  }
}

TEST(Cart, EmptyRowsRejected) {
  const auto d = testutil::blobs(3, 2, 1, 1.0, 1);
  const std::vector<std::size_t> none;
  try {
    fit_tree(d, none, TreeFitConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDataset);
  }
}

TEST(Cart, SeedsCanChangeTopology) {
  const auto d = testutil::blobs(60, 6, 3, 0.6, 5);
  TreeFitConfig a, b;
  a.max_features_per_split = b.max_features_per_split = 2;
  a.rng_seed = 1;
  b.rng_seed = 2;
  const auto ta = fit_tree(d, a), tb = fit_tree(d, b);
  EXPECT_FALSE(ta == tb);
  for (std::size_t r = 0; r < d.rows(); ++r) EXPECT_EQ(predict_tree(ta, d.row(r)), predict_tree(tb, d.row(r)));
}

TEST(Cart, UnprunedTreeFitsDistinctPoints) {
  const auto d = testutil::blobs(40, 3, 1, 0.5, 8);
  const auto tree = fit_tree(d, TreeFitConfig{});
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const double p = predict_tree(tree, d.row(r));
    EXPECT_EQ(p, d.label(r) == Condition::Faulty ? 1.0 : 0.0);
  }
}

TEST(Cart, SingleStumpImportance) {
  const auto d = make({{0, 5, 1}, {1, 5, 2}, {2, 5, 1}, {3, 5, 2}}, {0, 0, 1, 1});
  const auto tree = fit_tree(d, TreeFitConfig{});
  EXPECT_EQ(tree.node_count(), 3u);
  EXPECT_EQ(tree.depth(), 1u);
  const auto imp = tree_importances(tree, 3);
  EXPECT_DOUBLE_EQ(imp[0], 1.0);
  EXPECT_DOUBLE_EQ(imp[1], 0.0);
  EXPECT_DOUBLE_EQ(imp[2], 0.0);
}

TEST(Cart, SingleLeafWhenNothingSplits) {
  const auto d = make({{1, 1}, {1, 1}, {1, 1}}, {0, 1, 1});
  const auto tree = fit_tree(d, TreeFitConfig{});
  ASSERT_EQ(tree.node_count(), 1u);
  EXPECT_NEAR(predict_tree(tree, std::vector<double>{0, 0}), 2.0 / 3.0, 1e-15);
  const auto imp = tree_importances(tree, 2);
  EXPECT_EQ(imp, (std::vector<double>{0.0, 0.0}));
}

TEST(Cart, MinSamplesSplitStopsGrowth) {
  const auto d = testutil::blobs(20, 2, 1, 1.0, 2);
  TreeFitConfig cfg;
  cfg.min_samples_split = 1000;
  EXPECT_EQ(fit_tree(d, cfg).node_count(), 1u);
}

TEST(Cart, BoundaryGoesLeft) {
  const auto d = make({{0}, {2}}, {0, 1});
  const auto tree = fit_tree(d, TreeFitConfig{});
  EXPECT_EQ(predict_tree(tree, std::vector<double>{1.0}), 0.0);
  EXPECT_EQ(predict_tree(tree, std::vector<double>{std::nextafter(1.0, 2.0)}), 1.0);
}

TEST(Cart, ArityMismatch) {
  const auto d = testutil::blobs(5, 2, 1, 3.0, 2);
  const auto tree = fit_tree(d, TreeFitConfig{});
  try {
    predict_tree(tree, std::vector<double>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FeatureArity);
  }
}

TEST(Cart, JsonRoundTrip) {
  const auto d = testutil::blobs(30, 4, 2, 1.0, 5);
  TreeFitConfig cfg;
  cfg.max_features_per_split = 2;
  cfg.rng_seed = 17;
  const auto tree = fit_tree(d, cfg);
  const auto j = tree.to_json();
  const auto back = DecisionTree::from_json(nlohmann::json::parse(j.dump()));
  EXPECT_TRUE(back == tree);
  EXPECT_EQ(back.to_json(), j);
  for (std::size_t r = 0; r < d.rows(); ++r) EXPECT_EQ(predict_tree(back, d.row(r)), predict_tree(tree, d.row(r)));
  EXPECT_THROW(DecisionTree::from_json(nlohmann::json{{"n_features", 2}}), Error);
}

TEST(Cart, SameSeedSameTree) {
  const auto d = testutil::blobs(30, 5, 2, 1.0, 6);
  TreeFitConfig cfg;
  cfg.max_features_per_split = 2;
  cfg.rng_seed = 3;
  EXPECT_TRUE(fit_tree(d, cfg) == fit_tree(d, cfg));
}

TEST(FeatureSampling, DistinctSortedAndUniform) {
  Rng rng = make_rng(1);
  std::vector<int> hits(13, 0);
  for (int i = 0; i < 13000; ++i) {
    const auto s = sample_features(13, 4, rng);
    ASSERT_EQ(s.size(), 4u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 4u);
    for (auto j : s) ++hits[j];
  }
  // Each feature expected 4000 times.
  for (int h : hits) EXPECT_NEAR(h, 4000, 300);

  Rng a = make_rng(9), b = make_rng(9);
  const auto all = sample_features(5, 5, a);
  EXPECT_EQ(all, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(a(), b());  // no draws consumed
}
