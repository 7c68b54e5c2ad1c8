#include "rotorbar/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rotorbar/errors.hpp"

namespace rotorbar {

std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (kFeatureNames[i] == name) return i;
  throw Error(ErrorKind::Format, "unknown feature '" + std::string(name) + "'");
}

std::array<double, kNumFeatures> FeatureVector::values() const {
  return {mean_index,   rms,       rss,          peak_peak,     energy,
          shape_factor, impulsion, crest_factor, margin_factor, peak_avg_power_ratio,
          variance,     skewness,  kurtosis};
}

FeatureVector FeatureVector::from_parts(const DimensionalFeatures& d,
                                        const NondimensionalFeatures& n) {
  FeatureVector f;
  f.mean_index = d.mean_index;
  f.rms = d.rms;
  f.rss = d.rss;
  f.peak_peak = d.peak_peak;
  f.energy = d.energy;
  f.shape_factor = n.shape_factor;
  f.impulsion = n.impulsion;
  f.crest_factor = n.crest_factor;
  f.margin_factor = n.margin_factor;
  f.peak_avg_power_ratio = n.peak_avg_power_ratio;
  f.variance = n.variance;
  f.skewness = n.skewness;
  f.kurtosis = n.kurtosis;
  return f;
}

namespace {

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sum_of_squares(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Centered power sums, accumulated after the mean is known.
struct CentralSums {
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

CentralSums central_sums(std::span<const double> x, double mean) {
  CentralSums c;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    c.m2 += d2;
    c.m3 += d2 * d;
    c.m4 += d2 * d2;
  }
  return c;
}

void require_length(std::span<const double> x, std::size_t n) {
  if (x.size() < n)
    throw Error(ErrorKind::EmptySignal,
                "need at least " + std::to_string(n) + " samples, got " + std::to_string(x.size()));
}

}  // namespace

double std_dev(std::span<const double> x) {
  require_length(x, 1);
  const double mean = mean_of(x);
  return std::sqrt(central_sums(x, mean).m2 / static_cast<double>(x.size()));
}

DimensionalFeatures dimensional_features(std::span<const double> x) {
  require_length(x, 2);
  const auto n = static_cast<double>(x.size());
  const double energy = sum_of_squares(x);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());

  DimensionalFeatures d;
  d.mean_index = mean_of(x);
  d.rms = std::sqrt(energy / n);
  d.rss = std::sqrt(energy);
  d.peak_peak = *hi - *lo;
  d.energy = energy;
  return d;
}

NondimensionalFeatures nondimensional_features(std::span<const double> x) {
  require_length(x, 2);
  const auto n = static_cast<double>(x.size());

  double abs_sum = 0.0;
  double sqrt_abs_sum = 0.0;
  double abs_max = 0.0;
  double signed_max = x[0];
  for (double v : x) {
    const double a = std::abs(v);
    abs_sum += a;
    sqrt_abs_sum += std::sqrt(a);
    abs_max = std::max(abs_max, a);
    signed_max = std::max(signed_max, v);
  }
  const double mean_abs = abs_sum / n;
  const double rms = std::sqrt(sum_of_squares(x) / n);
  if (!(mean_abs > 0.0))
    throw Error(ErrorKind::DegenerateSignal, "mean absolute value is zero");

  const double mean = mean_of(x);
  const CentralSums c = central_sums(x, mean);
  const double sigma = std::sqrt(c.m2 / n);
  if (!(sigma > 0.0))
    throw Error(ErrorKind::DegenerateSignal, "standard deviation is zero");

  const double root_mean = sqrt_abs_sum / n;

  NondimensionalFeatures f;
  f.shape_factor = rms / mean_abs;
  f.impulsion = abs_max / mean_abs;
  f.crest_factor = abs_max / rms;
  f.margin_factor = abs_max / (root_mean * root_mean);
  f.peak_avg_power_ratio = (signed_max * signed_max) / (rms * rms);
  f.variance = c.m2 / (n - 1.0);
  f.skewness = (c.m3 / n) / (sigma * sigma * sigma);
  f.kurtosis = (c.m4 / n) / (sigma * sigma * sigma * sigma);
  return f;
}

FeatureVector extract_features(std::span<const double> x) {
  return FeatureVector::from_parts(dimensional_features(x), nondimensional_features(x));
}

FeatureVector extract_features(const SignalRecord& sig) { return extract_features(sig.samples); }

}  // namespace rotorbar
