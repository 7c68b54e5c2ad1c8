#include "rotorbar/signals.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "rotorbar/errors.hpp"
#include "rotorbar/rng.hpp"

namespace rotorbar {

std::string_view to_string(Condition c) {
  return c == Condition::Healthy ? "healthy" : "faulty";
}

std::string_view to_string(LoadLevel l) {
  switch (l) {
    case LoadLevel::L0: return "0.0";
    case LoadLevel::L0_5: return "0.5";
    case LoadLevel::L1_0: return "1.0";
    case LoadLevel::L1_5: return "1.5";
  }
  return "?";
}

Condition parse_condition(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "healthy") return Condition::Healthy;
  if (lower == "faulty") return Condition::Faulty;
  throw Error(ErrorKind::Format, "unknown condition '" + std::string(s) + "'");
}

LoadLevel parse_load(std::string_view s) {
  for (LoadLevel l : kLoadLevels)
    if (s == to_string(l)) return l;
  throw Error(ErrorKind::Format, "unknown load level '" + std::string(s) + "'");
}

double load_torque_nm(LoadLevel l) { return 0.5 * static_cast<double>(load_index(l)); }

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Configuration, what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }
bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void GeneratorConfig::validate() const {
  require(positive(fundamental_hz), "fundamental_hz must be > 0");
  require(positive(rated_current_a), "rated_current_a must be > 0");
  require(positive(startup_peak_multiple), "startup_peak_multiple must be > 0");
  for (double s : sync_time_s) require(positive(s), "sync_time_s entries must be > 0");
  require(std::isfinite(fault_sync_time_factor) && fault_sync_time_factor > 1.0,
          "fault_sync_time_factor must be > 1");
  require(non_negative(fault_modulation_depth) && fault_modulation_depth < 1.0,
          "fault_modulation_depth must lie in [0, 1)");
  require(positive(fault_modulation_hz), "fault_modulation_hz must be > 0");
  require(positive(noise_std_a), "noise_std_a must be > 0");
  require(non_negative(frequency_jitter_fraction) && frequency_jitter_fraction <= 0.05,
          "frequency_jitter_fraction must lie in [0, 0.05]");
  require(non_negative(amplitude_spread) && non_negative(peak_multiple_spread) &&
              non_negative(sync_time_spread) && non_negative(noise_spread),
          "spread parameters must be >= 0");
  require(positive(sample_rate_hz), "sample_rate_hz must be > 0");
  require(std::isfinite(duration_periods) && duration_periods >= 45.0,
          "duration_periods must be >= 45");
  require(quantization_bits >= 0 && quantization_bits <= 24, "quantization_bits must lie in [0, 24]");
  require(positive(quantization_range_a), "quantization_range_a must be > 0");
}

SignalRecord generate_signal(const GeneratorConfig& cfg, Condition condition, LoadLevel load,
                             int trial_id, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Fixed draw order: jitter, amplitude, peak, sync time, noise level, samples.
  const double jitter = cfg.frequency_jitter_fraction * unit(rng);
  const double amp_scale = std::exp(cfg.amplitude_spread * gauss(rng));
  const double peak_scale = std::exp(cfg.peak_multiple_spread * gauss(rng));
  const double sync_scale = std::exp(cfg.sync_time_spread * gauss(rng));
  const double noise_scale = std::exp(cfg.noise_spread * gauss(rng));

  const bool faulty = condition == Condition::Faulty;
  const double freq = cfg.fundamental_hz * (1.0 + jitter);
  const double steady = cfg.rated_current_a * std::numbers::sqrt2 * amp_scale;
  const double peak_multiple = cfg.startup_peak_multiple * peak_scale;
  const double tau = cfg.sync_time_s[load_index(load)] / 3.0 *
                     (faulty ? cfg.fault_sync_time_factor : 1.0) * sync_scale;
  const double noise_std = cfg.noise_std_a * noise_scale;

  const auto n = static_cast<std::size_t>(
                     std::ceil(cfg.duration_periods * cfg.sample_rate_hz / freq)) + 1;
  const double two_pi = 2.0 * std::numbers::pi;
  const double q_step = cfg.quantization_bits > 0
                            ? 2.0 * cfg.quantization_range_a / std::ldexp(1.0, cfg.quantization_bits)
                            : 0.0;

  SignalRecord rec;
  rec.sample_rate_hz = cfg.sample_rate_hz;
  rec.condition = condition;
  rec.load = load;
  rec.trial_id = trial_id;
  rec.seed = seed;
  rec.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / cfg.sample_rate_hz;
    const double decay = std::exp(-t / tau);
    const double envelope = steady * (1.0 + (peak_multiple - 1.0) * decay);
    double modulation = 1.0;
    if (faulty)
      modulation += cfg.fault_modulation_depth * std::sin(two_pi * cfg.fault_modulation_hz * t) * decay;
    double v = envelope * std::sin(two_pi * freq * t) * modulation + noise_std * gauss(rng);
    if (q_step > 0.0)
      v = std::clamp(std::round(v / q_step) * q_step, -cfg.quantization_range_a,
                     cfg.quantization_range_a);
    rec.samples[i] = v;
  }
  return rec;
}

std::vector<SignalRecord> generate_dataset(const GeneratorConfig& cfg, int trials_per_cell,
                                           std::uint64_t seed) {
  if (trials_per_cell < 1) throw Error(ErrorKind::Configuration, "trials_per_cell must be >= 1");
  cfg.validate();
  std::vector<SignalRecord> out;
  out.reserve(static_cast<std::size_t>(trials_per_cell) * 8);
  int trial_id = 0;
  for (Condition c : {Condition::Healthy, Condition::Faulty}) {
    for (LoadLevel l : kLoadLevels) {
      for (int t = 0; t < trials_per_cell; ++t, ++trial_id) {
        out.push_back(generate_signal(cfg, c, l, trial_id,
                                      derive_seed(seed, static_cast<std::uint64_t>(trial_id))));
      }
    }
  }
  return out;
}

std::vector<ZeroCrossing> find_zero_crossings(std::span<const double> x, double hysteresis) {
  std::vector<ZeroCrossing> out;
  if (x.size() < 2) return out;
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) return out;
  const double band = hysteresis * peak;

  int level = 0;  // +1 above the band, -1 below, 0 not yet known
  // Sample nearest the latest sign change; kNone when there is none pending.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t candidate = std::abs(x[0]) <= band ? 0 : kNone;

  auto emit = [&](CrossingDirection dir) {
    if (candidate != kNone) out.push_back({candidate, dir});
    candidate = kNone;
  };

  for (std::size_t j = 1; j < x.size(); ++j) {
    const double a = x[j - 1];
    const double b = x[j];
    if (std::signbit(a) != std::signbit(b)) {
      const double frac = a / (a - b);
      candidate = frac < 0.5 ? j - 1 : j;
    }
    if (b > band && level != 1) {
      emit(CrossingDirection::Rising);
      level = 1;
    } else if (b < -band && level != -1) {
      emit(CrossingDirection::Falling);
      level = -1;
    }
  }
  if (level != 0) {
    const auto dir = level < 0 ? CrossingDirection::Rising : CrossingDirection::Falling;
    if (candidate != kNone) {
      out.push_back({candidate, dir});
    } else if (std::abs(x.back()) <= band) {
      out.push_back({x.size() - 1, dir});
    }
  }
  return out;
}

SignalRecord preprocess(const SignalRecord& raw, int periods) {
  if (periods < 1) throw Error(ErrorKind::Configuration, "periods must be >= 1");
  if (raw.samples.empty() || !(raw.sample_rate_hz > 0.0))
    throw Error(ErrorKind::InsufficientSignal, "empty signal or non-positive sample rate");

  const auto crossings = find_zero_crossings(raw.samples);
  if (crossings.empty())
    throw Error(ErrorKind::NoCrossings,
                "trial " + std::to_string(raw.trial_id) + " has no zero crossings");

  const auto first = std::find_if(crossings.begin(), crossings.end(), [](const ZeroCrossing& c) {
    return c.direction == CrossingDirection::Rising;
  });
  const auto needed = static_cast<std::ptrdiff_t>(2 * periods);
  if (first == crossings.end() || std::distance(first, crossings.end()) <= needed)
    throw Error(ErrorKind::InsufficientSignal,
                "trial " + std::to_string(raw.trial_id) + " has fewer than " +
                    std::to_string(periods) + " complete periods");

  const std::size_t begin = first->index;
  const std::size_t end = std::next(first, needed)->index;

  SignalRecord out = raw;
  out.samples.assign(raw.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     raw.samples.begin() + static_cast<std::ptrdiff_t>(end) + 1);
  return out;
}

}  // namespace rotorbar
