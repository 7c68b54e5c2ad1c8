#include "rotorbar/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "rotorbar/dataset.hpp"
#include "rotorbar/errors.hpp"

namespace rotorbar {

using nlohmann::json;

namespace {

json cell_json(const CellResult& c) {
  json j{{"classifier", c.classifier},
         {"subset", c.subset},
         {"n_trees", c.n_trees ? json(*c.n_trees) : json(nullptr)}};
  if (c.error) {
    j["error"] = *c.error;
    return j;
  }
  j["auc_mean"] = c.auc.mean;
  j["auc_std"] = c.auc.std;
  j["accuracy_mean"] = c.accuracy.mean;
  j["accuracy_std"] = c.accuracy.std;
  j["fold_auc"] = c.fold_auc;
  j["fold_accuracy"] = c.fold_accuracy;
  if (!c.roc.empty()) {
    json roc = json::array();
    for (const auto& p : c.roc) roc.push_back({p.fpr, p.tpr});
    j["roc"] = roc;
  }
  return j;
}

CellResult cell_from_json(const json& j) {
  CellResult c;
  c.classifier = j.at("classifier").get<std::string>();
  c.subset = j.at("subset").get<std::string>();
  if (!j.at("n_trees").is_null()) c.n_trees = j.at("n_trees").get<std::size_t>();
  if (j.contains("error")) {
    c.error = j.at("error").get<std::string>();
    return c;
  }
  c.auc = {j.at("auc_mean").get<double>(), j.at("auc_std").get<double>()};
  c.accuracy = {j.at("accuracy_mean").get<double>(), j.at("accuracy_std").get<double>()};
  c.fold_auc = j.at("fold_auc").get<std::vector<double>>();
  c.fold_accuracy = j.at("fold_accuracy").get<std::vector<double>>();
  if (j.contains("roc"))
    for (const auto& p : j.at("roc")) c.roc.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return c;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Left-aligned first column, right-aligned others.
std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string pad(width[i] - r[i].size(), ' ');
      if (i) line += "  ";
      line += i == 0 ? r[i] + pad : pad + r[i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

void push_metric(std::vector<std::string>& row, const CellResult* c, bool accuracy) {
  if (c == nullptr) {
    row.insert(row.end(), {"-", "-"});
  } else if (c->error) {
    row.insert(row.end(), {"error", "-"});
  } else {
    const auto& m = accuracy ? c->accuracy : c->auc;
    row.push_back(fixed(m.mean));
    row.push_back(fixed(m.std));
  }
}

}  // namespace

json to_json(const EvalReport& r, const json& provenance) {
  json forest = json::array();
  for (const auto& c : r.forest_cells) forest.push_back(cell_json(c));
  json classifiers = json::array();
  for (const auto& c : r.classifier_cells) classifiers.push_back(cell_json(c));
  json imp = json::array();
  for (const auto& [name, score] : r.importances.entries) imp.push_back({{"feature", name}, {"importance", score}});
  return json{{"provenance", provenance},
              {"plan", to_json(r.plan)},
              {"dataset", {{"rows", r.rows}, {"healthy", r.healthy}, {"faulty", r.faulty}}},
              {"tree_count_sweep", forest},
              {"classifier_comparison", classifiers},
              {"importances", imp},
              {"importances_informative", r.importances.informative}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  try {
    r.plan = eval_plan_from_json(j.at("plan"));
    r.rows = j.at("dataset").at("rows").get<std::size_t>();
    r.healthy = j.at("dataset").at("healthy").get<std::size_t>();
    r.faulty = j.at("dataset").at("faulty").get<std::size_t>();
    for (const auto& c : j.at("tree_count_sweep")) r.forest_cells.push_back(cell_from_json(c));
    for (const auto& c : j.at("classifier_comparison")) r.classifier_cells.push_back(cell_from_json(c));
    for (const auto& e : j.at("importances"))
      r.importances.entries.emplace_back(e.at("feature").get<std::string>(), e.at("importance").get<double>());
    r.importances.informative = j.at("importances_informative").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("report: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::Format, e.what());
  }
  return r;
}

std::string tree_count_table(const EvalReport& r) {
  std::ostringstream out;
  for (bool acc : {false, true}) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> head{acc ? "Accuracy" : "AUC"}, sub{""};
    for (const auto& s : r.plan.subsets) {
      head.insert(head.end(), {s.name, ""});
      sub.insert(sub.end(), {"mean", "STD"});
    }
    rows.push_back(head);
    rows.push_back(sub);
    for (auto t : r.plan.tree_counts) {
      std::vector<std::string> row{std::to_string(t) + " Trees"};
      for (const auto& s : r.plan.subsets) {
        const CellResult* c = nullptr;
        for (const auto& cell : r.forest_cells)
          if (cell.subset == s.name && cell.n_trees == t) c = &cell;
        push_metric(row, c, acc);
      }
      rows.push_back(row);
    }
    if (acc) out << '\n';
    out << render(rows);
  }
  return out.str();
}

std::string classifier_table(const EvalReport& r) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Classifier"}, sub{""};
  for (const auto& s : r.plan.subsets) {
    head.insert(head.end(), {s.name, ""});
    sub.insert(sub.end(), {"mean", "STD"});
  }
  rows.push_back(head);
  rows.push_back(sub);
  std::vector<std::pair<std::string, std::string>> names;
  if (r.plan.run_forest) names.emplace_back("random_forest", "Random Forest");
  for (const auto& spec : r.plan.classifiers)
    names.emplace_back(std::string(to_string(spec.kind)), std::string(display_name(spec.kind)));
  for (const auto& [key, label] : names) {
    std::vector<std::string> row{label};
    for (const auto& s : r.plan.subsets) {
      const CellResult* c = nullptr;
      for (const auto& cell : r.classifier_cells)
        if (cell.classifier == key && cell.subset == s.name) c = &cell;
      push_metric(row, c, false);
    }
    rows.push_back(row);
  }
  return render(rows);
}

std::string importance_csv(const EvalReport& r) {
  std::string out = "rank,feature,importance\n";
  std::size_t rank = 1;
  for (const auto& [name, score] : r.importances.entries)
    out += std::to_string(rank++) + "," + name + "," + format_double(score) + "\n";
  return out;
}

std::string cells_csv(const EvalReport& r) {
  std::string out = "table,classifier,subset,n_trees,auc_mean,auc_std,accuracy_mean,accuracy_std,error\n";
  auto emit = [&](const char* table, const CellResult& c) {
    out += std::string(table) + "," + c.classifier + "," + c.subset + "," +
           (c.n_trees ? std::to_string(*c.n_trees) : "") + ",";
    if (c.error) {
      std::string e = *c.error;
      std::replace(e.begin(), e.end(), ',', ';');
      std::replace(e.begin(), e.end(), '\n', ' ');
      out += ",,,," + e + "\n";
    } else {
      out += format_double(c.auc.mean) + "," + format_double(c.auc.std) + "," +
             format_double(c.accuracy.mean) + "," + format_double(c.accuracy.std) + ",\n";
    }
  };
  for (const auto& c : r.forest_cells) emit("tree_count_sweep", c);
  for (const auto& c : r.classifier_cells) emit("classifier_comparison", c);
  return out;
}

std::string roc_csv(const CellResult& cell) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : cell.roc) out += format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
  return out;
}

}  // namespace rotorbar
