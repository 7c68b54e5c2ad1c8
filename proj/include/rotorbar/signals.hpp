#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rotorbar {

enum class Condition { Healthy, Faulty };
enum class LoadLevel { L0, L0_5, L1_0, L1_5 };

inline constexpr std::array<LoadLevel, 4> kLoadLevels{LoadLevel::L0, LoadLevel::L0_5,
                                                      LoadLevel::L1_0, LoadLevel::L1_5};

std::string_view to_string(Condition c);
std::string_view to_string(LoadLevel l);
Condition parse_condition(std::string_view s);
LoadLevel parse_load(std::string_view s);
/// Starting load torque in newton-meters.
double load_torque_nm(LoadLevel l);
inline std::size_t load_index(LoadLevel l) { return static_cast<std::size_t>(l); }

/// One startup-transient stator current waveform.
struct SignalRecord {
  std::vector<double> samples;  // amperes
  double sample_rate_hz = 0.0;
  Condition condition = Condition::Healthy;
  LoadLevel load = LoadLevel::L0;
  int trial_id = 0;
  std::uint64_t seed = 0;
};

/// Parameters of the synthetic startup-current model
///
///   i(t) = A(t) * sin(2 pi f' t) * m(t) + n(t)
///   A(t) = A_ss * (1 + (k - 1) * exp(-t / tau))
///   m(t) = 1 + depth * sin(2 pi f_mod t) * exp(-t / tau)     (Faulty only)
///
/// with A_ss = rated_current * sqrt(2), k the startup peak multiple and
/// tau = sync_time[load] / 3 (times fault_sync_time_factor when Faulty), so
/// the envelope is within 5 % of steady state at the nominal sync time.
/// The fault modulation sits below the supply frequency. Its lower sideband
/// is a few hertz, slow enough to move the window mean.
///
/// The *_spread fields are log-normal per-trial variations (sigma of the
/// log) modelling trial-to-trial scatter of the rig. Zero disables them.
struct GeneratorConfig {
  double fundamental_hz = 50.0;
  double rated_current_a = 1.3;
  double startup_peak_multiple = 3.2;
  std::array<double, 4> sync_time_s{0.24, 0.30, 0.38, 0.48};
  double fault_sync_time_factor = 1.45;
  double fault_modulation_depth = 0.35;
  double fault_modulation_hz = 42.0;
  double noise_std_a = 0.008;
  double frequency_jitter_fraction = 0.015;

  // Tuned so the classes overlap on every single feature.
  double amplitude_spread = 0.07;
  double peak_multiple_spread = 0.015;
  double sync_time_spread = 0.14;
  double noise_spread = 0.5;

  double sample_rate_hz = 5000.0;
  double duration_periods = 46.0;
  /// 0 disables quantization; otherwise uniform quantization over
  /// [-quantization_range_a, +quantization_range_a].
  int quantization_bits = 0;
  double quantization_range_a = 12.5;

  /// Throws ErrorKind::Configuration when any invariant is violated.
  void validate() const;
};

SignalRecord generate_signal(const GeneratorConfig& cfg, Condition condition, LoadLevel load,
                             int trial_id, std::uint64_t seed);

/// trials_per_cell x 2 conditions x 4 loads records, condition-major,
/// load-minor, trial ascending. trial_id is unique across the dataset.
std::vector<SignalRecord> generate_dataset(const GeneratorConfig& cfg, int trials_per_cell,
                                           std::uint64_t seed);

enum class CrossingDirection { Rising, Falling };

struct ZeroCrossing {
  std::size_t index;  // sample nearest the interpolated crossing
  CrossingDirection direction;
};

/// Fraction of max|x| used as the hysteresis band of the crossing detector.
inline constexpr double kCrossingHysteresis = 0.1;

/// Sign-alternating zero crossings. A crossing is registered when the
/// signal moves from below -h to above +h (or back), with h a fraction of
/// max|x|; its position is the last sign change inside the band, resolved to
/// the sample nearest the linear-interpolated zero. A signal that starts
/// (ends) inside the band on the far side of a crossing counts its first
/// (last) sample as one.
std::vector<ZeroCrossing> find_zero_crossings(std::span<const double> x,
                                              double hysteresis = kCrossingHysteresis);

/// Trims to `periods` fundamental periods starting at the first rising zero
/// crossing. Both endpoints are kept, so a clean 50 Hz / 5 kHz signal yields
/// 4001 samples for 40 periods.
SignalRecord preprocess(const SignalRecord& raw, int periods = 40);

}  // namespace rotorbar
