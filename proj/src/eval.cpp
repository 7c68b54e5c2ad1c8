#include "rotorbar/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <numeric>
#include <set>
#include <thread>

#include "rotorbar/errors.hpp"
#include "rotorbar/features.hpp"
#include "rotorbar/rng.hpp"

namespace rotorbar {

using nlohmann::json;

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const Condition> labels,
                                                       std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::Configuration, "need at least 2 folds");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i] == Condition::Faulty ? 1 : 0].push_back(i);
  for (const auto& c : by_class)
    if (c.size() < k)
      throw Error(ErrorKind::InsufficientClassSamples,
                  "class has " + std::to_string(c.size()) + " rows, fewer than " + std::to_string(k) +
                      " folds");
  Rng rng = make_rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  for (auto& c : by_class) {
    std::shuffle(c.begin(), c.end(), rng);
    for (std::size_t i = 0; i < c.size(); ++i) folds[i % k].push_back(c[i]);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

double auc(std::span<const double> scores, std::span<const Condition> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorKind::FeatureArity, "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Count healthy rows strictly below each faulty score, ties half.
  double pairs = 0.0;
  std::size_t healthy_below = 0, n_f = 0, n_h = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i, h = 0, f = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == Condition::Faulty ? f : h) += 1;
      ++j;
    }
    pairs += static_cast<double>(f) * (static_cast<double>(healthy_below) + 0.5 * static_cast<double>(h));
    healthy_below += h;
    n_f += f;
    n_h += h;
    i = j;
  }
  if (n_f == 0 || n_h == 0) throw Error(ErrorKind::UndefinedMetric, "AUC needs both classes");
  return pairs / (static_cast<double>(n_f) * static_cast<double>(n_h));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Condition> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorKind::FeatureArity, "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t n_f = 0, n_h = 0;
  for (auto l : labels) (l == Condition::Faulty ? n_f : n_h) += 1;
  if (n_f == 0 || n_h == 0) throw Error(ErrorKind::UndefinedMetric, "ROC needs both classes");
  std::vector<RocPoint> out{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == Condition::Faulty ? tp : fp) += 1;
      ++j;
    }
    out.push_back({static_cast<double>(fp) / static_cast<double>(n_h),
                   static_cast<double>(tp) / static_cast<double>(n_f)});
    i = j;
  }
  return out;
}

double accuracy(std::span<const double> scores, std::span<const Condition> labels, double threshold) {
  if (scores.empty()) throw Error(ErrorKind::UndefinedMetric, "accuracy of zero rows");
  std::size_t right = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if ((scores[i] >= threshold) == (labels[i] == Condition::Faulty)) ++right;
  return static_cast<double>(right) / static_cast<double>(scores.size());
}

MeanStd mean_std(std::span<const double> v) {
  if (v.empty()) return {};
  const auto n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / n)};
}

CvResult cross_validate(const Dataset& data, const std::vector<std::vector<std::size_t>>& folds,
                        const Trainer& trainer, double threshold) {
  CvResult out;
  out.scores.assign(data.rows(), 0.0);
  std::vector<int> fold_of(data.rows(), -1);
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (auto r : folds[f]) fold_of[r] = static_cast<int>(f);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t r = 0; r < data.rows(); ++r)
      if (fold_of[r] != static_cast<int>(f)) train_rows.push_back(r);
    const Scorer scorer = trainer(data.subset_rows(train_rows), f);
    std::vector<double> s;
    std::vector<Condition> y;
    for (auto r : folds[f]) {
      s.push_back(scorer(data.row(r)));
      y.push_back(data.label(r));
      out.scores[r] = s.back();
    }
    out.fold_auc.push_back(auc(s, y));
    out.fold_accuracy.push_back(accuracy(s, y, threshold));
  }
  return out;
}

std::vector<FeatureSubset> default_subsets() {
  return {{"All13", all_feature_names()},
          {"Top3", {"mean_index", "impulsion", "shape_factor"}},
          {"Top2", {"mean_index", "impulsion"}}};
}

void EvalPlan::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::Configuration, what);
  };
  require(folds >= 2, "folds must be >= 2");
  require(!subsets.empty(), "plan needs at least one feature subset");
  std::set<std::string> names;
  for (const auto& s : subsets) {
    require(!s.features.empty(), "feature subset '" + s.name + "' is empty");
    require(names.insert(s.name).second, "duplicate subset name '" + s.name + "'");
    for (const auto& f : s.features) feature_index(f);
  }
  for (auto t : tree_counts) require(t >= 1, "tree counts must be >= 1");
  require(comparison_trees >= 1 && importance_trees >= 1, "tree counts must be >= 1");
  forest.validate();
  for (const auto& c : classifiers) c.validate();
}

json to_json(const EvalPlan& p) {
  json classifiers = json::array();
  for (const auto& c : p.classifiers) classifiers.push_back(to_json(c));
  json subsets = json::array();
  for (const auto& s : p.subsets) subsets.push_back({{"name", s.name}, {"features", s.features}});
  json forest = to_json(p.forest);
  forest.erase("n_trees");
  forest.erase("rng_seed");
  return json{{"folds", p.folds},
              {"seed", p.seed},
              {"run_forest", p.run_forest},
              {"tree_counts", p.tree_counts},
              {"comparison_trees", p.comparison_trees},
              {"importance_trees", p.importance_trees},
              {"forest", forest},
              {"classifiers", classifiers},
              {"subsets", subsets},
              {"collect_roc", p.collect_roc}};
}

EvalPlan eval_plan_from_json(const json& j, EvalPlan p) {
  if (!j.is_object()) throw Error(ErrorKind::Configuration, "eval plan must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "folds") p.folds = v.get<std::size_t>();
      else if (key == "seed") p.seed = v.get<std::uint64_t>();
      else if (key == "run_forest") p.run_forest = v.get<bool>();
      else if (key == "tree_counts") p.tree_counts = v.get<std::vector<std::size_t>>();
      else if (key == "comparison_trees") p.comparison_trees = v.get<std::size_t>();
      else if (key == "importance_trees") p.importance_trees = v.get<std::size_t>();
      else if (key == "forest") p.forest = forest_config_from_json(v, p.forest);
      else if (key == "classifiers") {
        p.classifiers.clear();
        for (const auto& c : v) p.classifiers.push_back(classifier_spec_from_json(c));
      } else if (key == "subsets") {
        p.subsets.clear();
        for (const auto& s : v)
          p.subsets.push_back({s.at("name").get<std::string>(), s.at("features").get<std::vector<std::string>>()});
      } else if (key == "collect_roc") p.collect_roc = v.get<bool>();
      else if (key == "threads") p.threads = v.get<std::size_t>();
      else throw Error(ErrorKind::Configuration, "unknown eval plan key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("eval plan: ") + e.what());
  }
  p.validate();
  return p;
}

const CellResult* EvalReport::find(std::string_view classifier, std::string_view subset,
                                   std::optional<std::size_t> n_trees) const {
  for (const auto* cells : {&classifier_cells, &forest_cells})
    for (const auto& c : *cells)
      if (c.classifier == classifier && c.subset == subset && (!n_trees || c.n_trees == n_trees))
        return &c;
  return nullptr;
}

ForestConfig selection_forest(std::uint64_t seed, std::size_t n_trees) {
  ForestConfig cfg;
  cfg.n_trees = n_trees;
  cfg.rng_seed = seed;
  return cfg;
}

std::vector<std::string> select_features(const Dataset& data, std::size_t k_top, std::uint64_t seed) {
  if (k_top < 1 || k_top > data.features())
    throw Error(ErrorKind::Configuration, "k_top must lie in [1, " + std::to_string(data.features()) + "]");
  const auto model = fit_forest(data, selection_forest(seed));
  const auto ranking = forest_importances(model);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k_top; ++i) out.push_back(ranking.entries[i].first);
  return out;
}

namespace {

constexpr std::uint64_t kFoldStream = 0;
constexpr std::uint64_t kForestStream = 1;
constexpr std::uint64_t kImportanceStream = 3;

struct CellTask {
  std::string classifier;
  const FeatureSubset* subset = nullptr;
  std::optional<std::size_t> n_trees;
  const ClassifierSpec* spec = nullptr;
  bool comparison = false;
};

CellResult run_cell(const CellTask& task, const EvalPlan& plan, const Dataset& data,
                    const std::vector<std::vector<std::size_t>>& folds) {
  CellResult cell;
  cell.classifier = task.classifier;
  cell.subset = task.subset->name;
  cell.n_trees = task.n_trees;
  try {
    const Dataset d = data.subset_features(task.subset->features);
    Trainer trainer;
    double threshold = 0.5;
    if (task.spec == nullptr) {
      // Per-fold forest seeds, shared by every tree count so larger
      // forests extend smaller ones.
      ForestConfig cfg = plan.forest;
      cfg.n_trees = *task.n_trees;
      cfg.threads = 1;
      threshold = cfg.decision_threshold;
      trainer = [cfg, seed = plan.seed](const Dataset& train, std::size_t fold) -> Scorer {
        ForestConfig c = cfg;
        c.rng_seed = derive_seed(derive_seed(seed, kForestStream), fold);
        auto model = std::make_shared<ForestModel>(fit_forest(train, c));
        return [model](std::span<const double> x) { return predict_forest(*model, x).probability; };
      };
    } else {
      const ClassifierSpec spec = *task.spec;
      threshold = decision_threshold(spec.kind);
      trainer = [spec](const Dataset& rows, std::size_t) -> Scorer {
        auto clf = std::make_shared<TrainedClassifier>(train(spec, rows));
        return [clf](std::span<const double> x) { return score(*clf, x); };
      };
    }
    const auto cv = cross_validate(d, folds, trainer, threshold);
    cell.fold_auc = cv.fold_auc;
    cell.fold_accuracy = cv.fold_accuracy;
    cell.auc = mean_std(cell.fold_auc);
    cell.accuracy = mean_std(cell.fold_accuracy);
    if (plan.collect_roc) cell.roc = roc_curve(cv.scores, d.labels());
  } catch (const Error& e) {
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

EvalReport run_plan(const EvalPlan& plan, const Dataset& data) {
  plan.validate();
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "cannot evaluate an empty dataset");
  const auto folds = stratified_folds(data.labels(), plan.folds, derive_seed(plan.seed, kFoldStream));

  std::vector<CellTask> tasks;
  if (plan.run_forest) {
    for (auto t : plan.tree_counts)
      for (const auto& s : plan.subsets) tasks.push_back({"random_forest", &s, t, nullptr, false});
    for (const auto& s : plan.subsets)
      tasks.push_back({"random_forest", &s, plan.comparison_trees, nullptr, true});
  }
  for (const auto& spec : plan.classifiers)
    for (const auto& s : plan.subsets)
      tasks.push_back({std::string(to_string(spec.kind)), &s, std::nullopt, &spec, true});

  std::vector<CellResult> results(tasks.size());
  const std::size_t workers =
      std::clamp<std::size_t>(plan.threads == 0 ? std::thread::hardware_concurrency() : plan.threads, 1,
                              std::max<std::size_t>(tasks.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = run_cell(tasks[i], plan, data, folds);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < tasks.size(); i = next++)
            results[i] = run_cell(tasks[i], plan, data, folds);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  EvalReport report;
  report.plan = plan;
  report.rows = data.rows();
  report.healthy = data.count(Condition::Healthy);
  report.faulty = data.count(Condition::Faulty);
  for (std::size_t i = 0; i < tasks.size(); ++i)
    (tasks[i].comparison ? report.classifier_cells : report.forest_cells).push_back(std::move(results[i]));

  if (plan.run_forest) {
    const auto model =
        fit_forest(data, selection_forest(derive_seed(plan.seed, kImportanceStream), plan.importance_trees));
    report.importances = forest_importances(model);
  }
  return report;
}

}  // namespace rotorbar
