// rotorbar command-line front end.
#include <fcntl.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotorbar/baselines.hpp"
#include "rotorbar/dataset.hpp"
#include "rotorbar/errors.hpp"
#include "rotorbar/eval.hpp"
#include "rotorbar/features.hpp"
#include "rotorbar/forest.hpp"
#include "rotorbar/report.hpp"
#include "rotorbar/signal_io.hpp"
#include "rotorbar/signals.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rotorbar;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kConvergence = 3;

constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out;
  std::string format = "table";
  std::optional<std::size_t> trees;
  std::string features;
  std::optional<int> trials;
  std::optional<std::size_t> threads;
  std::vector<std::string> inputs;
};

// Config file layout: {"seed", "trials_per_cell", "generator", "forest",
// "classifier", "plan"}; all keys optional.
json load_config(const Options& o) {
  if (o.config_path.empty()) return json::object();
  json j;
  try {
    j = read_json_file(o.config_path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!j.is_object()) throw UsageError(o.config_path + ": config must be a JSON object");
  static const std::set<std::string> known{"seed", "trials_per_cell", "generator", "forest", "classifier", "plan"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw UsageError(o.config_path + ": unknown config key '" + k + "'");
  return j;
}

std::uint64_t require_seed(const Options& o, const json& cfg) {
  if (o.seed) return *o.seed;
  if (cfg.contains("seed")) return cfg.at("seed").get<std::uint64_t>();
  throw UsageError("--seed is required for this command (or set \"seed\" in --config)");
}

fs::path require_out(const Options& o) {
  if (o.out.empty()) throw UsageError("--out <dir> is required for this command");
  return o.out;
}

std::vector<std::string> split_names(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (item.empty()) continue;
    try {
      feature_index(item);
    } catch (const Error&) {
      throw UsageError("--features: unknown feature '" + item + "'");
    }
    out.push_back(item);
  }
  if (out.empty()) throw UsageError("--features needs at least one feature name");
  return out;
}

// Exclusive lock on an output directory, held for the command's lifetime.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".rotorbar.lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw Error(ErrorKind::Io, dir.string() + " is locked by another run (remove " + path_.string() +
                                     " if stale)");
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

std::string record_file(const SignalRecord& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "signals/%04d_%s_%s.csv", r.trial_id, std::string(to_string(r.condition)).c_str(),
                std::string(to_string(r.load)).c_str());
  return buf;
}

int cmd_simulate(const Options& o) {
  const auto cfg = load_config(o);
  const auto seed = require_seed(o, cfg);
  const auto out = require_out(o);
  GeneratorConfig gen;
  if (cfg.contains("generator")) merge_json(cfg.at("generator"), gen);
  int trials = cfg.value("trials_per_cell", 40);
  if (o.trials) trials = *o.trials;
  gen.validate();
  if (trials < 1) throw UsageError("--trials must be >= 1");

  DirLock lock(out);
  fs::create_directories(out / "signals");
  const auto records = generate_dataset(gen, trials, seed);
  Manifest m;
  m.seed = seed;
  m.trials_per_cell = trials;
  m.generator = gen;
  for (const auto& r : records) {
    const auto file = record_file(r);
    write_signal_csv(out / file, r);
    m.records.push_back({file, r.condition, r.load, r.trial_id, r.seed, r.sample_rate_hz});
  }
  write_manifest(out / "manifest.json", m);
  std::cout << "wrote " << records.size() << " records to " << out.string() << "\n";
  return kOk;
}

int cmd_extract(const Options& o) {
  if (o.inputs.size() != 1) throw UsageError("extract takes exactly one manifest path");
  const auto out = require_out(o);
  const fs::path manifest_path = o.inputs[0];
  const auto m = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();

  std::vector<SignalRecord> trimmed;
  std::vector<std::string> failures;
  for (const auto& e : m.records) {
    try {
      auto rec = preprocess(load_record(dir, e));
      extract_features(rec);  // surfaces degenerate signals here with the trial id
      trimmed.push_back(std::move(rec));
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::Io) throw;
      failures.push_back("trial " + std::to_string(e.trial_id) + " (" + e.file + "): " + err.what());
    }
  }
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << "error: " << f << "\n";
    std::cerr << failures.size() << " of " << m.records.size() << " records failed; no features written\n";
    return kData;
  }
  DirLock lock(out);
  const auto data = features_dataset(trimmed);
  write_feature_csv(out / "features.csv", data);
  std::cout << "wrote " << data.rows() << " rows to " << (out / "features.csv").string() << "\n";
  return kOk;
}

Dataset select_columns(const Dataset& data, const std::vector<std::string>& names) {
  std::vector<std::string> missing;
  for (const auto& n : names) {
    const auto& have = data.feature_names();
    if (std::find(have.begin(), have.end(), n) == have.end()) missing.push_back(n);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& n : missing) list += (list.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::FeatureArity, "feature CSV lacks required columns: " + list);
  }
  return data.subset_features(names);
}

int cmd_train(const Options& o) {
  if (o.inputs.size() != 1) throw UsageError("train takes exactly one feature CSV path");
  const auto cfg = load_config(o);
  const auto seed = require_seed(o, cfg);
  const auto out = require_out(o);
  auto data = read_feature_csv(o.inputs[0]);
  if (!o.features.empty()) data = select_columns(data, split_names(o.features));

  json model;
  const std::string kind = cfg.contains("classifier") ? (cfg.at("classifier").is_string()
                                                             ? cfg.at("classifier").get<std::string>()
                                                             : cfg.at("classifier").value("kind", ""))
                                                       : "random_forest";
  if (kind == "random_forest") {
    ForestConfig fc;
    if (cfg.contains("forest")) fc = forest_config_from_json(cfg.at("forest"), fc);
    fc.rng_seed = seed;
    if (o.trees) fc.n_trees = *o.trees;
    if (o.threads) fc.threads = *o.threads;
    fc.validate();
    DirLock lock(out);
    const auto forest = fit_forest(data, fc);
    model = to_json(forest);
    write_json_file(out / "model.json", model);
    std::cout << "trained " << fc.n_trees << " trees on " << data.rows() << " rows, "
              << data.features() << " features; oob_error "
              << (std::isnan(forest.oob_error) ? std::string("n/a") : format_double(forest.oob_error)) << "\n";
  } else {
    auto spec = classifier_spec_from_json(cfg.at("classifier"));
    if (spec.kind == ClassifierKind::SvmRbf) spec.svm.seed = seed;
    spec.validate();
    DirLock lock(out);
    const auto clf = train(spec, data);
    model = json{{"classifier", to_json(clf)}, {"feature_names", data.feature_names()}, {"seed", seed}};
    write_json_file(out / "model.json", model);
    std::cout << "trained " << display_name(spec.kind) << " on " << data.rows() << " rows, "
              << data.features() << " features\n";
  }
  return kOk;
}

bool blank_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + p.string());
  for (char c; in.get(c);)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

int cmd_predict(const Options& o) {
  if (o.inputs.size() != 2) throw UsageError("predict takes a model path and a feature CSV path");
  const auto j = read_json_file(o.inputs[0]);
  const bool is_forest = j.contains("trees");
  std::optional<ForestModel> forest;
  std::optional<TrainedClassifier> clf;
  std::vector<std::string> names;
  try {
    if (is_forest) {
      forest = forest_from_json(j);
      names = forest->feature_names;
    } else {
      clf = classifier_from_json(j.at("classifier"));
      names = j.at("feature_names").get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, o.inputs[0] + ": " + e.what());
  }

  std::ostringstream csv;
  csv << "trial_id,probability,predicted\n";
  std::size_t rows = 0, faulty = 0;
  if (blank_file(o.inputs[1])) {
    std::cerr << "warning: " << o.inputs[1] << " is empty; writing an empty verdict file\n";
  } else {
    const auto all = read_feature_csv(o.inputs[1], false);
    if (all.empty()) std::cerr << "warning: " << o.inputs[1] << " has no rows; writing an empty verdict file\n";
    const auto data = select_columns(all, names);
    rows = data.rows();
    for (std::size_t r = 0; r < data.rows(); ++r) {
      double p = 0.0;
      Condition label = Condition::Healthy;
      if (forest) {
        const auto pred = predict_forest(*forest, data.row(r));
        p = pred.probability;
        label = pred.label;
      } else {
        p = score(*clf, data.row(r));
        label = p >= decision_threshold(clf->kind()) ? Condition::Faulty : Condition::Healthy;
      }
      faulty += label == Condition::Faulty;
      csv << data.info(r).trial_id << ',' << format_double(p) << ',' << to_string(label) << '\n';
    }
  }
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    DirLock lock(o.out);
    write_text_file(fs::path(o.out) / "verdicts.csv", csv.str());
  }
  std::cerr << "rows " << rows << ", Healthy " << rows - faulty << ", Faulty " << faulty << "\n";
  return kOk;
}

void print_report(const EvalReport& report, const json& j, const std::string& format) {
  if (format == "json") {
    std::cout << j.dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << cells_csv(report);
  } else {
    if (!report.forest_cells.empty()) std::cout << tree_count_table(report) << "\n";
    if (!report.classifier_cells.empty()) std::cout << classifier_table(report);
  }
}

void write_report_files(const fs::path& out, const EvalReport& report, const json& j) {
  write_text_file(out / "report.json", j.dump(2) + "\n");
  if (!report.forest_cells.empty()) write_text_file(out / "table3.txt", tree_count_table(report));
  if (!report.classifier_cells.empty()) write_text_file(out / "table4.txt", classifier_table(report));
  write_text_file(out / "importances.csv", importance_csv(report));
  write_text_file(out / "cells.csv", cells_csv(report));
  if (report.plan.collect_roc) {
    fs::create_directories(out / "roc");
    for (const auto* cells : {&report.forest_cells, &report.classifier_cells})
      for (const auto& c : *cells) {
        if (c.roc.empty()) continue;
        std::string name = c.classifier + "_" + c.subset;
        if (c.n_trees) name += "_" + std::to_string(*c.n_trees);
        write_text_file(out / "roc" / (name + ".csv"), roc_csv(c));
      }
  }
}

int cmd_evaluate(const Options& o) {
  if (o.inputs.size() != 1) throw UsageError("evaluate takes exactly one feature CSV path");
  const auto cfg = load_config(o);
  const auto seed = require_seed(o, cfg);
  EvalPlan plan;
  if (cfg.contains("plan")) plan = eval_plan_from_json(cfg.at("plan"), plan);
  if (cfg.contains("forest")) plan.forest = forest_config_from_json(cfg.at("forest"), plan.forest);
  plan.seed = seed;
  if (o.trees) {
    plan.tree_counts = {*o.trees};
    plan.comparison_trees = *o.trees;
  }
  if (!o.features.empty()) plan.subsets = {{"Selected", split_names(o.features)}};
  if (o.threads) plan.threads = *o.threads;
  plan.validate();

  const fs::path input = o.inputs[0];
  const auto data = read_feature_csv(input);
  std::optional<DirLock> lock;
  if (!o.out.empty()) lock.emplace(o.out);
  const auto report = run_plan(plan, data);
  const json provenance{{"tool", "rotorbar"}, {"version", kVersion}, {"command", "evaluate"},
                        {"seed", seed}, {"input", input.filename().string()}};
  const auto j = to_json(report, provenance);
  if (!o.out.empty()) write_report_files(o.out, report, j);
  print_report(report, j, o.format);

  std::size_t failed = 0;
  for (const auto* cells : {&report.forest_cells, &report.classifier_cells})
    for (const auto& c : *cells)
      if (!c.ok()) {
        ++failed;
        std::cerr << "cell " << c.classifier << "/" << c.subset << " failed: " << *c.error << "\n";
      }
  return failed ? kData : kOk;
}

int cmd_report(const Options& o) {
  if (o.inputs.size() != 1) throw UsageError("report takes exactly one report JSON path");
  const auto j = read_json_file(o.inputs[0]);
  EvalReport report;
  try {
    report = report_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, o.inputs[0] + ": " + e.what());
  }
  if (!o.out.empty()) {
    DirLock lock(o.out);
    write_report_files(o.out, report, j);
  }
  print_report(report, j, o.format);
  return kOk;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Configuration:
      return kUsage;
    case ErrorKind::Convergence:
      return kConvergence;
    default:
      return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broken rotor bar detection from startup current transients"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Seed for every random draw");
    sub->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--format", o.format, "Console output format")
        ->check(CLI::IsMember({"json", "table", "csv"}));
  };

  auto* simulate = app.add_subcommand("simulate", "Generate the synthetic startup-current dataset");
  add_common(simulate);
  simulate->add_option("--trials", o.trials, "Trials per (condition, load) cell");

  auto* extract = app.add_subcommand("extract", "Trim signals and compute the 13 features");
  add_common(extract);
  extract->add_option("manifest", o.inputs, "manifest.json written by simulate")->required();

  auto* train_cmd = app.add_subcommand("train", "Fit a random forest (or a baseline) on a feature CSV");
  add_common(train_cmd);
  train_cmd->add_option("--trees", o.trees, "Number of trees")->check(CLI::PositiveNumber);
  train_cmd->add_option("--features", o.features, "Comma-separated feature names");
  train_cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  train_cmd->add_option("features_csv", o.inputs, "Feature CSV")->required();

  auto* predict = app.add_subcommand("predict", "Score a feature CSV with a trained model");
  add_common(predict);
  predict->add_option("inputs", o.inputs, "model.json then feature CSV")->required()->expected(2);

  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate forests and baselines");
  add_common(evaluate);
  evaluate->add_option("--trees", o.trees, "Use a single tree count")->check(CLI::PositiveNumber);
  evaluate->add_option("--features", o.features, "Evaluate one comma-separated feature subset");
  evaluate->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  evaluate->add_option("features_csv", o.inputs, "Feature CSV")->required();

  auto* report = app.add_subcommand("report", "Render a saved report");
  add_common(report);
  report->add_option("report_json", o.inputs, "report.json written by evaluate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*extract) return cmd_extract(o);
    if (*train_cmd) return cmd_train(o);
    if (*predict) return cmd_predict(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*report) return cmd_report(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << " (final gradient norm "
              << format_double(e.final_gradient_norm()) << ")\n";
    return kConvergence;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
