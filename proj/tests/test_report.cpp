#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"
#include "rotorbar/report.hpp"

using namespace rotorbar;

namespace {

const EvalReport& sample_report() {
  static const EvalReport r = [] {
    const auto raw = testutil::blobs(20, kNumFeatures, 3, 1.5, 4);
    Dataset d(all_feature_names());
    for (std::size_t i = 0; i < raw.rows(); ++i) d.add_row(raw.row(i), raw.label(i), {static_cast<int>(i)});
    EvalPlan plan;
    plan.seed = 1;
    plan.tree_counts = {5, 10};
    plan.comparison_trees = 10;
    plan.importance_trees = 10;
    plan.collect_roc = true;
    return run_plan(plan, d);
  }();
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Report, JsonLayoutAndRoundTrip) {
  const auto& r = sample_report();
  const auto j = to_json(r, {{"seed", 1}});
  for (const char* key : {"provenance", "plan", "dataset", "tree_count_sweep", "classifier_comparison", "importances"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("dataset").at("rows"), 40);
  EXPECT_EQ(j.at("tree_count_sweep").size(), 6u);
  EXPECT_EQ(j.at("classifier_comparison").size(), 18u);
  EXPECT_EQ(j.at("importances").size(), 13u);
  const auto back = report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json(back, {{"seed", 1}}).dump(), j.dump());
}

TEST(Report, TreeCountTable) {
  const auto t = tree_count_table(sample_report());
  EXPECT_NE(t.find("5 Trees"), std::string::npos);
  EXPECT_NE(t.find("10 Trees"), std::string::npos);
  EXPECT_NE(t.find("All13"), std::string::npos);
  EXPECT_NE(t.find("Top2"), std::string::npos);
  EXPECT_NE(t.find("AUC"), std::string::npos);
  EXPECT_NE(t.find("Accuracy"), std::string::npos);
}

TEST(Report, ClassifierTable) {
  const auto t = classifier_table(sample_report());
  for (const char* name : {"Random Forest", "CART", "Naive Bayes", "Logistic regression", "Linear Ridge", "SVM"})
    EXPECT_NE(t.find(name), std::string::npos) << name;
  // Random Forest row comes first.
  EXPECT_LT(t.find("Random Forest"), t.find("CART"));
}

TEST(Report, Csvs) {
  const auto& r = sample_report();
  const auto imp = lines(importance_csv(r));
  ASSERT_EQ(imp.size(), 14u);
  EXPECT_EQ(imp[0], "rank,feature,importance");
  EXPECT_EQ(imp[1].substr(0, 2), "1,");

  const auto* cell = r.find("random_forest", "All13", 10);
  ASSERT_NE(cell, nullptr);
  ASSERT_FALSE(cell->roc.empty());
  const auto roc = lines(roc_csv(*cell));
  EXPECT_EQ(roc[0], "fpr,tpr");
  EXPECT_EQ(roc[1], "0,0");
  EXPECT_EQ(roc.back(), "1,1");

  const auto cells = lines(cells_csv(r));
  EXPECT_EQ(cells.size(), 1 + 6 + 18u);
}
