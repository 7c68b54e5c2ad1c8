#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "rotorbar/dataset.hpp"
#include "rotorbar/errors.hpp"
#include "rotorbar/features.hpp"
#include "rotorbar/signal_io.hpp"

using namespace rotorbar;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rotorbar_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Dataset small_feature_set() {
  const GeneratorConfig cfg;
  std::vector<SignalRecord> recs;
  for (const auto& r : generate_dataset(cfg, 2, 9)) recs.push_back(preprocess(r));
  return features_dataset(recs);
}

}  // namespace

TEST(Dataset, FromRecords) {
  const auto d = small_feature_set();
  EXPECT_EQ(d.rows(), 16u);
  EXPECT_EQ(d.features(), kNumFeatures);
  EXPECT_EQ(d.count(Condition::Healthy), 8u);
  EXPECT_EQ(d.feature_names(), all_feature_names());
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const double imp = d.at(r, d.column("impulsion"));
    const double shape = d.at(r, d.column("shape_factor"));
    const double crest = d.at(r, d.column("crest_factor"));
    EXPECT_NEAR(imp, shape * crest, 1e-12 * imp);
    EXPECT_LE(crest, imp);
    EXPECT_LE(imp, d.at(r, d.column("margin_factor")));
  }
}

TEST(Dataset, CsvRoundTripIsExact) {
  const auto d = small_feature_set();
  const auto text = feature_csv_string(d);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "trial_id,condition,load,mean_index,rms,rss,peak_peak,energy,shape_factor,impulsion,"
            "crest_factor,margin_factor,peak_avg_power_ratio,variance,skewness,kurtosis");
  const auto back = parse_feature_csv(text);
  ASSERT_EQ(back.rows(), d.rows());
  for (std::size_t r = 0; r < d.rows(); ++r) {
    EXPECT_EQ(back.label(r), d.label(r));
    EXPECT_EQ(back.info(r).trial_id, d.info(r).trial_id);
    EXPECT_EQ(back.info(r).load, d.info(r).load);
    for (std::size_t j = 0; j < d.features(); ++j) EXPECT_EQ(back.at(r, j), d.at(r, j));
  }
  EXPECT_EQ(feature_csv_string(back), text);
}

TEST(Dataset, FormatDoubleRoundTrips) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(g) * std::pow(10.0, (i % 30) - 15);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_THROW(parse_double("abc"), Error);
}

TEST(Dataset, ColumnsResolvedByName) {
  const std::string text =
      "condition,impulsion,trial_id,mean_index\n"
      "Healthy,1.5,4,0.01\n"
      "Faulty,2.5,5,0.02\n";
  const auto d = parse_feature_csv(text);
  EXPECT_EQ(d.features(), 2u);
  EXPECT_EQ(d.at(1, d.column("mean_index")), 0.02);
  EXPECT_EQ(d.at(0, d.column("impulsion")), 1.5);
  EXPECT_EQ(d.info(1).trial_id, 5);

  const std::vector<std::string> want{"mean_index", "impulsion"};
  const auto s = d.subset_features(want);
  EXPECT_EQ(s.feature_names(), want);
  EXPECT_EQ(s.at(0, 0), 0.01);
  EXPECT_EQ(s.at(0, 1), 1.5);
}

TEST(Dataset, RejectsBadCsv) {
  EXPECT_THROW(parse_feature_csv(""), Error);
  EXPECT_THROW(parse_feature_csv("trial_id,load,rms\n1,0Nm,2\n"), Error);
  EXPECT_THROW(parse_feature_csv("condition,wobble\nHealthy,1\n"), Error);
  EXPECT_THROW(parse_feature_csv("condition,rms\nHealthy,1,2\n"), Error);
  EXPECT_THROW(parse_feature_csv("condition,rms\nHealthy,x\n"), Error);
  const auto header_only = parse_feature_csv("condition,rms\n");
  EXPECT_TRUE(header_only.empty());
}

TEST(Dataset, SubsetsAndArity) {
  auto d = testutil::blobs(5, 3, 1, 2.0, 1);
  const std::vector<std::size_t> idx{0, 0, 9};
  const auto s = d.subset_rows(idx);
  EXPECT_EQ(s.rows(), 3u);
  EXPECT_EQ(s.at(1, 2), d.at(0, 2));
  EXPECT_EQ(s.label(2), Condition::Faulty);
  const std::vector<double> short_row{1.0};
  EXPECT_THROW(d.add_row(short_row, Condition::Healthy), Error);
  const std::vector<std::string> missing{"nope"};
  EXPECT_THROW(d.subset_features(missing), Error);
  EXPECT_THROW(d.with_labels({Condition::Healthy}), Error);
}

TEST(SignalIo, SignalCsvRoundTrip) {
  const auto dir = scratch_dir("signal");
  const auto rec = generate_signal(GeneratorConfig{}, Condition::Faulty, LoadLevel::L0_5, 7, 11);
  write_signal_csv(dir / "s.csv", rec);
  std::ifstream in(dir / "s.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t_s,current_a");
  EXPECT_EQ(read_signal_csv(dir / "s.csv"), rec.samples);
}

TEST(SignalIo, SignalCsvErrors) {
  const auto dir = scratch_dir("signal_bad");
  write_text_file(dir / "bad.csv", "time,amps\n0,1\n");
  try {
    read_signal_csv(dir / "bad.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
  }
  try {
    read_signal_csv(dir / "missing.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(SignalIo, ManifestRoundTrip) {
  Manifest m;
  m.seed = 123;
  m.trials_per_cell = 1;
  m.generator.noise_std_a = 0.02;
  m.records.push_back({"signals/a.csv", Condition::Faulty, LoadLevel::L1_0, 4, 99, 5000.0});
  const auto j = to_json(m);
  const auto back = manifest_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.records.at(0).file, "signals/a.csv");
  EXPECT_EQ(back.records.at(0).condition, Condition::Faulty);
  EXPECT_EQ(back.generator.noise_std_a, 0.02);
}

TEST(SignalIo, GeneratorMergeRejectsUnknownKeys) {
  GeneratorConfig cfg;
  merge_json(nlohmann::json{{"noise_std_a", 0.5}}, cfg);
  EXPECT_EQ(cfg.noise_std_a, 0.5);
  EXPECT_THROW(merge_json(nlohmann::json{{"noise", 0.5}}, cfg), Error);
  EXPECT_THROW(merge_json(nlohmann::json{{"noise_std_a", "x"}}, cfg), Error);
  GeneratorConfig again;
  merge_json(to_json(cfg), again);
  EXPECT_EQ(to_json(again), to_json(cfg));
}
