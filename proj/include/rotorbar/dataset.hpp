#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rotorbar/features.hpp"
#include "rotorbar/signals.hpp"

namespace rotorbar {

/// Where a dataset row came from.
struct RowInfo {
  int trial_id = 0;
  LoadLevel load = LoadLevel::L0;
};

/// Labeled, row-major feature matrix. Columns are addressed by name; the
/// label of each row is its motor condition.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<std::string> feature_names);

  void add_row(std::span<const double> values, Condition label, RowInfo info = {});

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t features() const noexcept { return names_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * names_.size(), names_.size()};
  }
  double at(std::size_t r, std::size_t f) const { return values_[r * names_.size() + f]; }
  Condition label(std::size_t i) const { return labels_[i]; }
  const RowInfo& info(std::size_t i) const { return info_[i]; }
  const std::vector<Condition>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  std::size_t count(Condition c) const;
  /// Column index of a named feature; throws ErrorKind::FeatureArity if absent.
  std::size_t column(std::string_view name) const;

  /// Rows in the given order; repeated indices are repeated rows.
  Dataset subset_rows(std::span<const std::size_t> indices) const;
  /// Named columns in the given order.
  Dataset subset_features(std::span<const std::string> names) const;
  Dataset with_labels(std::vector<Condition> labels) const;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<Condition> labels_;
  std::vector<RowInfo> info_;
};

std::vector<std::string> all_feature_names();

/// One row per record; records must already be preprocessed.
Dataset features_dataset(std::span<const SignalRecord> records);

/// Feature-matrix CSV: trial_id,condition,load followed by feature columns.
void write_feature_csv(const std::filesystem::path& path, const Dataset& data);
std::string feature_csv_string(const Dataset& data);
/// Reads every feature column present in the header, in header order. With
/// require_labels false a missing condition column is allowed and rows are
/// labelled Healthy as a placeholder.
Dataset read_feature_csv(const std::filesystem::path& path, bool require_labels = true);
Dataset parse_feature_csv(std::string_view text, bool require_labels = true);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace rotorbar
