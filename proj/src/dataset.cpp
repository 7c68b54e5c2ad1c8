#include "rotorbar/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rotorbar/errors.hpp"

namespace rotorbar {

Dataset::Dataset(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {}

void Dataset::add_row(std::span<const double> values, Condition label, RowInfo info) {
  if (values.size() != names_.size())
    throw Error(ErrorKind::FeatureArity, "row has " + std::to_string(values.size()) +
                                             " values, dataset has " +
                                             std::to_string(names_.size()) + " features");
  values_.insert(values_.end(), values.begin(), values.end());
  labels_.push_back(label);
  info_.push_back(info);
}

std::size_t Dataset::count(Condition c) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), c));
}

std::size_t Dataset::column(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end())
    throw Error(ErrorKind::FeatureArity, "missing feature column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

Dataset Dataset::subset_rows(std::span<const std::size_t> indices) const {
  Dataset out(names_);
  out.values_.reserve(indices.size() * names_.size());
  for (std::size_t i : indices) out.add_row(row(i), labels_[i], info_[i]);
  return out;
}

Dataset Dataset::subset_features(std::span<const std::string> names) const {
  std::vector<std::size_t> cols;
  cols.reserve(names.size());
  for (const auto& n : names) cols.push_back(column(n));
  Dataset out(std::vector<std::string>(names.begin(), names.end()));
  std::vector<double> buf(cols.size());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) buf[c] = at(r, cols[c]);
    out.add_row(buf, labels_[r], info_[r]);
  }
  return out;
}

Dataset Dataset::with_labels(std::vector<Condition> labels) const {
  if (labels.size() != rows())
    throw Error(ErrorKind::FeatureArity, "label count does not match row count");
  Dataset out = *this;
  out.labels_ = std::move(labels);
  return out;
}

std::vector<std::string> all_feature_names() {
  return {kFeatureNames.begin(), kFeatureNames.end()};
}

Dataset features_dataset(std::span<const SignalRecord> records) {
  Dataset out(all_feature_names());
  for (const auto& rec : records) {
    const auto v = extract_features(rec).values();
    out.add_row(v, rec.condition, {rec.trial_id, rec.load});
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error(ErrorKind::Format, "not a number: '" + std::string(s) + "'");
  return v;
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim_line(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string feature_csv_string(const Dataset& data) {
  std::ostringstream os;
  os << "trial_id,condition,load";
  for (const auto& n : data.feature_names()) os << ',' << n;
  os << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    os << data.info(r).trial_id << ',' << to_string(data.label(r)) << ','
       << to_string(data.info(r).load);
    for (double v : data.row(r)) os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

void write_feature_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << feature_csv_string(data);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Dataset parse_feature_csv(std::string_view text, bool require_labels) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    const auto line = trim_line(text.substr(start, pos - start));
    if (!line.empty()) lines.push_back(line);
    start = pos + 1;
  }
  if (lines.empty()) throw Error(ErrorKind::Format, "feature CSV has no header");

  const auto header = split_csv_line(lines[0]);
  int trial_col = -1, cond_col = -1, load_col = -1;
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto h = header[i];
    if (h == "trial_id") trial_col = static_cast<int>(i);
    else if (h == "condition") cond_col = static_cast<int>(i);
    else if (h == "load") load_col = static_cast<int>(i);
    else {
      feature_index(h);  // rejects unknown columns
      feature_cols.push_back(i);
      names.emplace_back(h);
    }
  }
  if (cond_col < 0 && require_labels) throw Error(ErrorKind::Format, "feature CSV lacks a 'condition' column");

  Dataset out(names);
  std::vector<double> buf(feature_cols.size());
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split_csv_line(lines[l]);
    if (cells.size() != header.size())
      throw Error(ErrorKind::Format, "line " + std::to_string(l + 1) + " has " +
                                         std::to_string(cells.size()) + " cells, expected " +
                                         std::to_string(header.size()));
    for (std::size_t c = 0; c < feature_cols.size(); ++c) buf[c] = parse_double(cells[feature_cols[c]]);
    RowInfo info;
    if (trial_col >= 0) info.trial_id = static_cast<int>(parse_double(cells[static_cast<std::size_t>(trial_col)]));
    if (load_col >= 0) info.load = parse_load(cells[static_cast<std::size_t>(load_col)]);
    const auto label = cond_col >= 0 ? parse_condition(cells[static_cast<std::size_t>(cond_col)])
                                     : Condition::Healthy;
    out.add_row(buf, label, info);
  }
  return out;
}

Dataset read_feature_csv(const std::filesystem::path& path, bool require_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_feature_csv(ss.str(), require_labels);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace rotorbar
