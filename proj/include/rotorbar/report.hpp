#pragma once

#include <string>

#include <json.hpp>

#include "rotorbar/eval.hpp"

namespace rotorbar {

/// Full report. `provenance` (configs, seeds) is embedded verbatim.
nlohmann::json to_json(const EvalReport& report, const nlohmann::json& provenance = nlohmann::json::object());
EvalReport report_from_json(const nlohmann::json& j);

/// Forest tree-count sweep: one row per tree count, AUC and accuracy
/// (mean, STD) per feature subset.
std::string tree_count_table(const EvalReport& report);

/// Classifier comparison: one row per classifier, AUC (mean, STD) per
/// feature subset.
std::string classifier_table(const EvalReport& report);

/// rank,feature,importance
std::string importance_csv(const EvalReport& report);

/// One row per cell of both tables.
std::string cells_csv(const EvalReport& report);

/// fpr,tpr
std::string roc_csv(const CellResult& cell);

}  // namespace rotorbar
