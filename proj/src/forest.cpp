#include "rotorbar/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "rotorbar/errors.hpp"
#include "rotorbar/rng.hpp"

namespace rotorbar {

using nlohmann::json;

std::size_t MaxFeatures::resolve(std::size_t p) const {
  switch (mode) {
    case Mode::All:
      return p;
    case Mode::Sqrt: {
      std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(p)));
      while (r * r < p) ++r;
      while (r > 1 && (r - 1) * (r - 1) >= p) --r;
      return std::max<std::size_t>(r, 1);
    }
    case Mode::Explicit:
      if (k < 1 || k > p)
        throw Error(ErrorKind::Configuration,
                    "max_features " + std::to_string(k) + " outside [1, " + std::to_string(p) + "]");
      return k;
  }
  return p;
}

void ForestConfig::validate() const {
  if (n_trees < 1) throw Error(ErrorKind::Configuration, "n_trees must be >= 1");
  if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0))
    throw Error(ErrorKind::Configuration, "decision_threshold must lie in [0, 1]");
  if (min_samples_split < 2) throw Error(ErrorKind::Configuration, "min_samples_split must be >= 2");
  if (max_features.mode == MaxFeatures::Mode::Explicit && max_features.k < 1)
    throw Error(ErrorKind::Configuration, "max_features must be >= 1");
}

Condition tree_vote(const DecisionTree& tree, std::span<const double> x) {
  const auto& c = tree.leaf_for(x).counts;
  return c.faulty >= c.healthy ? Condition::Faulty : Condition::Healthy;
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
  std::vector<std::size_t> rows(n);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (auto& r : rows) r = pick(rng);
  return rows;
}

Rng tree_rng(std::uint64_t rng_seed, std::size_t tree_index) {
  return make_rng(derive_seed(rng_seed, tree_index));
}

namespace {

struct FittedTree {
  DecisionTree tree;
  std::vector<std::size_t> oob;
};

FittedTree fit_one(const Dataset& data, const ForestConfig& cfg, std::size_t k, std::size_t index) {
  Rng rng = tree_rng(cfg.rng_seed, index);
  const std::size_t n = data.rows();
  std::vector<std::size_t> rows(n);
  std::vector<char> drawn(n, 1);
  if (cfg.bootstrap) {
    rows = bootstrap_sample(n, rng);
    std::fill(drawn.begin(), drawn.end(), 0);
    for (std::size_t r : rows) drawn[r] = 1;
  } else {
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  TreeFitConfig tcfg;
  tcfg.max_features_per_split = k;
  tcfg.min_samples_split = cfg.min_samples_split;
  FittedTree out{fit_tree(data, rows, tcfg, rng), {}};
  for (std::size_t i = 0; i < n; ++i)
    if (!drawn[i]) out.oob.push_back(i);
  return out;
}

}  // namespace

ForestModel fit_forest(const Dataset& data, const ForestConfig& cfg) {
  cfg.validate();
  if (data.rows() < 2) throw Error(ErrorKind::EmptyDataset, "forest needs at least 2 rows");
  if (data.count(Condition::Healthy) == 0 || data.count(Condition::Faulty) == 0)
    throw Error(ErrorKind::DegenerateLabels, "forest needs both classes in the training data");
  const std::size_t p = data.features();
  const std::size_t k = cfg.max_features.resolve(p);

  std::vector<FittedTree> fitted(cfg.n_trees);
  std::size_t workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  workers = std::clamp<std::size_t>(workers, 1, cfg.n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < cfg.n_trees; ++t) fitted[t] = fit_one(data, cfg, k, t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = next++; t < cfg.n_trees; t = next++) fitted[t] = fit_one(data, cfg, k, t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ForestModel model;
  model.config = cfg;
  model.feature_names = data.feature_names();
  model.importances.assign(p, 0.0);
  for (auto& f : fitted) {
    const auto imp = tree_importances(f.tree, p);
    for (std::size_t j = 0; j < p; ++j) model.importances[j] += imp[j];
    model.trees.push_back(std::move(f.tree));
    model.oob_rows.push_back(std::move(f.oob));
  }
  for (double& v : model.importances) v /= static_cast<double>(cfg.n_trees);
  const double total = std::accumulate(model.importances.begin(), model.importances.end(), 0.0);
  if (total > 0.0)
    for (double& v : model.importances) v /= total;

  // OOB majority vote per row.
  std::vector<std::int64_t> faulty_votes(data.rows(), 0), votes(data.rows(), 0);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    for (std::size_t r : model.oob_rows[t]) {
      ++votes[r];
      if (tree_vote(model.trees[t], data.row(r)) == Condition::Faulty) ++faulty_votes[r];
    }
  }
  std::size_t scored = 0, wrong = 0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    if (votes[r] == 0) continue;
    ++scored;
    const Condition c = 2 * faulty_votes[r] >= votes[r] ? Condition::Faulty : Condition::Healthy;
    if (c != data.label(r)) ++wrong;
  }
  model.oob_error = scored == 0 ? std::numeric_limits<double>::quiet_NaN()
                                : static_cast<double>(wrong) / static_cast<double>(scored);
  return model;
}

ForestPrediction predict_forest(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.n_features())
    throw Error(ErrorKind::FeatureArity, "forest expects " + std::to_string(model.n_features()) +
                                             " features, got " + std::to_string(x.size()));
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += predict_tree(tree, x);
  ForestPrediction out;
  out.probability = sum / static_cast<double>(model.trees.size());
  out.label = out.probability >= model.config.decision_threshold ? Condition::Faulty : Condition::Healthy;
  return out;
}

Condition majority_vote(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.n_features())
    throw Error(ErrorKind::FeatureArity, "forest expects " + std::to_string(model.n_features()) +
                                             " features, got " + std::to_string(x.size()));
  std::size_t faulty = 0;
  for (const auto& tree : model.trees)
    if (tree_vote(tree, x) == Condition::Faulty) ++faulty;
  return 2 * faulty >= model.trees.size() ? Condition::Faulty : Condition::Healthy;
}

ImportanceRanking forest_importances(const ForestModel& model) {
  ImportanceRanking out;
  std::vector<std::size_t> order(model.importances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return model.importances[a] > model.importances[b];
  });
  for (std::size_t j : order) {
    out.entries.emplace_back(model.feature_names[j], model.importances[j]);
    if (model.importances[j] > 0.0) out.informative = true;
  }
  return out;
}

json to_json(const ForestConfig& cfg) {
  json mf;
  switch (cfg.max_features.mode) {
    case MaxFeatures::Mode::Sqrt: mf = "sqrt"; break;
    case MaxFeatures::Mode::All: mf = "all"; break;
    case MaxFeatures::Mode::Explicit: mf = cfg.max_features.k; break;
  }
  return json{{"n_trees", cfg.n_trees},
              {"max_features", mf},
              {"rng_seed", cfg.rng_seed},
              {"decision_threshold", cfg.decision_threshold},
              {"min_samples_split", cfg.min_samples_split},
              {"bootstrap", cfg.bootstrap}};
}

ForestConfig forest_config_from_json(const json& j, ForestConfig cfg) {
  if (!j.is_object()) throw Error(ErrorKind::Configuration, "forest config must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_trees") {
        cfg.n_trees = v.get<std::size_t>();
      } else if (key == "max_features") {
        if (v.is_string()) {
          const auto s = v.get<std::string>();
          if (s == "sqrt") cfg.max_features = MaxFeatures::sqrt();
          else if (s == "all") cfg.max_features = MaxFeatures::all();
          else throw Error(ErrorKind::Configuration, "max_features must be sqrt, all or an integer");
        } else {
          cfg.max_features = MaxFeatures::explicit_k(v.get<std::size_t>());
        }
      } else if (key == "rng_seed") {
        cfg.rng_seed = v.get<std::uint64_t>();
      } else if (key == "decision_threshold") {
        cfg.decision_threshold = v.get<double>();
      } else if (key == "min_samples_split") {
        cfg.min_samples_split = v.get<std::size_t>();
      } else if (key == "bootstrap") {
        cfg.bootstrap = v.get<bool>();
      } else if (key == "threads") {
        cfg.threads = v.get<std::size_t>();
      } else {
        throw Error(ErrorKind::Configuration, "unknown forest config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("forest config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const ForestModel& model) {
  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(t.to_json());
  json oob = json::array();
  for (const auto& o : model.oob_rows) oob.push_back(o);
  json oob_error = std::isnan(model.oob_error) ? json(nullptr) : json(model.oob_error);
  return json{{"config", to_json(model.config)},
              {"seed", model.config.rng_seed},
              {"feature_names", model.feature_names},
              {"trees", trees},
              {"oob_rows", oob},
              {"importances", model.importances},
              {"oob_error", oob_error}};
}

ForestModel forest_from_json(const json& j) {
  ForestModel m;
  try {
    m.config = forest_config_from_json(j.at("config"));
    m.config.rng_seed = j.at("seed").get<std::uint64_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& t : j.at("trees")) {
      m.trees.push_back(DecisionTree::from_json(t));
      if (m.trees.back().n_features() != m.feature_names.size())
        throw Error(ErrorKind::Format, "tree arity differs from the model's feature list");
    }
    if (m.trees.empty()) throw Error(ErrorKind::Format, "model has no trees");
    if (j.contains("oob_rows"))
      m.oob_rows = j.at("oob_rows").get<std::vector<std::vector<std::size_t>>>();
    else
      m.oob_rows.resize(m.trees.size());
    m.importances = j.at("importances").get<std::vector<double>>();
    if (m.importances.size() != m.feature_names.size())
      throw Error(ErrorKind::Format, "importances length differs from the feature list");
    const auto& e = j.at("oob_error");
    m.oob_error = e.is_null() ? std::numeric_limits<double>::quiet_NaN() : e.get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("model: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Configuration) throw Error(ErrorKind::Format, e.what());
    throw;
  }
  return m;
}

}  // namespace rotorbar
