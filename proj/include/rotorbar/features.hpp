#pragma once

#include <array>
#include <span>
#include <string_view>

#include "rotorbar/signals.hpp"

namespace rotorbar {

inline constexpr std::size_t kNumFeatures = 13;

/// Canonical feature order, also the column order of feature-matrix CSVs.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames{
    "mean_index", "rms",          "rss",       "peak_peak", "energy",
    "shape_factor", "impulsion",  "crest_factor", "margin_factor",
    "peak_avg_power_ratio", "variance", "skewness", "kurtosis"};

/// Index into kFeatureNames, or throws ErrorKind::Format.
std::size_t feature_index(std::string_view name);

struct DimensionalFeatures {
  double mean_index = 0.0;
  double rms = 0.0;
  double rss = 0.0;
  double peak_peak = 0.0;
  double energy = 0.0;
};

struct NondimensionalFeatures {
  double shape_factor = 0.0;
  double impulsion = 0.0;
  double crest_factor = 0.0;
  double margin_factor = 0.0;
  double peak_avg_power_ratio = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

struct FeatureVector {
  double mean_index = 0.0;
  double rms = 0.0;
  double rss = 0.0;
  double peak_peak = 0.0;
  double energy = 0.0;
  double shape_factor = 0.0;
  double impulsion = 0.0;
  double crest_factor = 0.0;
  double margin_factor = 0.0;
  double peak_avg_power_ratio = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;

  std::array<double, kNumFeatures> values() const;
  static FeatureVector from_parts(const DimensionalFeatures& d, const NondimensionalFeatures& n);
};

/// Population standard deviation (divisor N).
double std_dev(std::span<const double> x);

/// mean, RMS, root-sum-of-squares, peak-to-peak and energy. Requires N >= 2.
DimensionalFeatures dimensional_features(std::span<const double> x);

/// Shape, impulsion, crest, margin, peak-to-average power, variance
/// (divisor N - 1), skewness and kurtosis (population moments).
///
/// The peak-to-average power ratio uses the signed maximum, max(X)^2 / RMS^2,
/// unlike the other peak ratios which use max|X|.
///
/// Throws ErrorKind::DegenerateSignal when mean|X|, RMS or the standard
/// deviation is zero.
NondimensionalFeatures nondimensional_features(std::span<const double> x);

FeatureVector extract_features(std::span<const double> x);
FeatureVector extract_features(const SignalRecord& sig);

}  // namespace rotorbar
