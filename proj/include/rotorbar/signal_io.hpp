#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotorbar/signals.hpp"

namespace rotorbar {

/// Two-column CSV, header `t_s,current_a`.
void write_signal_csv(const std::filesystem::path& path, const SignalRecord& rec);
/// Reads samples only; the caller supplies metadata (normally from a manifest).
std::vector<double> read_signal_csv(const std::filesystem::path& path);

struct ManifestEntry {
  std::string file;  // relative to the manifest's directory
  Condition condition = Condition::Healthy;
  LoadLevel load = LoadLevel::L0;
  int trial_id = 0;
  std::uint64_t seed = 0;
  double sample_rate_hz = 0.0;
};

struct Manifest {
  std::uint64_t seed = 0;
  int trials_per_cell = 0;
  GeneratorConfig generator;
  std::vector<ManifestEntry> records;
};

nlohmann::json to_json(const GeneratorConfig& cfg);
/// Keys absent from `j` keep the values already in `cfg`; unknown keys are
/// rejected.
void merge_json(const nlohmann::json& j, GeneratorConfig& cfg);

nlohmann::json to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

/// Loads one record's samples and metadata.
SignalRecord load_record(const std::filesystem::path& manifest_dir, const ManifestEntry& e);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `j` pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rotorbar
