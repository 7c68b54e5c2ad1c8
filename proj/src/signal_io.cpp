#include "rotorbar/signal_io.hpp"

#include <fstream>
#include <sstream>

#include "rotorbar/dataset.hpp"
#include "rotorbar/errors.hpp"

namespace rotorbar {

using nlohmann::json;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

void write_signal_csv(const std::filesystem::path& path, const SignalRecord& rec) {
  std::string text = "t_s,current_a\n";
  text.reserve(rec.samples.size() * 32);
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    text += format_double(static_cast<double>(i) / rec.sample_rate_hz);
    text += ',';
    text += format_double(rec.samples[i]);
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<double> read_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Format, path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_s,current_a")
    throw Error(ErrorKind::Format, path.string() + ": expected header 't_s,current_a'");
  std::vector<double> samples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) + ": missing ','");
    samples.push_back(parse_double(std::string_view(line).substr(comma + 1)));
  }
  return samples;
}

json to_json(const GeneratorConfig& c) {
  return json{{"fundamental_hz", c.fundamental_hz},
              {"rated_current_a", c.rated_current_a},
              {"startup_peak_multiple", c.startup_peak_multiple},
              {"sync_time_s", c.sync_time_s},
              {"fault_sync_time_factor", c.fault_sync_time_factor},
              {"fault_modulation_depth", c.fault_modulation_depth},
              {"fault_modulation_hz", c.fault_modulation_hz},
              {"noise_std_a", c.noise_std_a},
              {"frequency_jitter_fraction", c.frequency_jitter_fraction},
              {"amplitude_spread", c.amplitude_spread},
              {"peak_multiple_spread", c.peak_multiple_spread},
              {"sync_time_spread", c.sync_time_spread},
              {"noise_spread", c.noise_spread},
              {"sample_rate_hz", c.sample_rate_hz},
              {"duration_periods", c.duration_periods},
              {"quantization_bits", c.quantization_bits},
              {"quantization_range_a", c.quantization_range_a}};
}

void merge_json(const json& j, GeneratorConfig& c) {
  if (!j.is_object()) throw Error(ErrorKind::Configuration, "generator config must be an object");
  const json known = to_json(c);
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw Error(ErrorKind::Configuration, "unknown generator key '" + key + "'");
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("fundamental_hz", c.fundamental_hz);
    get("rated_current_a", c.rated_current_a);
    get("startup_peak_multiple", c.startup_peak_multiple);
    get("sync_time_s", c.sync_time_s);
    get("fault_sync_time_factor", c.fault_sync_time_factor);
    get("fault_modulation_depth", c.fault_modulation_depth);
    get("fault_modulation_hz", c.fault_modulation_hz);
    get("noise_std_a", c.noise_std_a);
    get("frequency_jitter_fraction", c.frequency_jitter_fraction);
    get("amplitude_spread", c.amplitude_spread);
    get("peak_multiple_spread", c.peak_multiple_spread);
    get("sync_time_spread", c.sync_time_spread);
    get("noise_spread", c.noise_spread);
    get("sample_rate_hz", c.sample_rate_hz);
    get("duration_periods", c.duration_periods);
    get("quantization_bits", c.quantization_bits);
    get("quantization_range_a", c.quantization_range_a);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("generator config: ") + e.what());
  }
  c.validate();
}

json to_json(const Manifest& m) {
  json records = json::array();
  for (const auto& e : m.records) {
    records.push_back({{"file", e.file},
                       {"condition", to_string(e.condition)},
                       {"load", to_string(e.load)},
                       {"trial_id", e.trial_id},
                       {"seed", e.seed},
                       {"sample_rate", e.sample_rate_hz}});
  }
  return json{{"seed", m.seed},
              {"trials_per_cell", m.trials_per_cell},
              {"generator", to_json(m.generator)},
              {"records", std::move(records)}};
}

Manifest manifest_from_json(const json& j) {
  try {
    Manifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.trials_per_cell = j.value("trials_per_cell", 0);
    if (j.contains("generator")) merge_json(j.at("generator"), m.generator);
    for (const auto& r : j.at("records")) {
      ManifestEntry e;
      e.file = r.at("file").get<std::string>();
      e.condition = parse_condition(r.at("condition").get<std::string>());
      e.load = parse_load(r.at("load").get<std::string>());
      e.trial_id = r.at("trial_id").get<int>();
      e.seed = r.at("seed").get<std::uint64_t>();
      e.sample_rate_hz = r.at("sample_rate").get<double>();
      m.records.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("manifest: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  write_json_file(path, to_json(m));
}

Manifest read_manifest(const std::filesystem::path& path) {
  try {
    return manifest_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

SignalRecord load_record(const std::filesystem::path& manifest_dir, const ManifestEntry& e) {
  SignalRecord rec;
  rec.samples = read_signal_csv(manifest_dir / e.file);
  rec.sample_rate_hz = e.sample_rate_hz;
  rec.condition = e.condition;
  rec.load = e.load;
  rec.trial_id = e.trial_id;
  rec.seed = e.seed;
  return rec;
}

}  // namespace rotorbar
