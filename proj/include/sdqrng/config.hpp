#pragma once

#include <cstdint>
#include <string>

namespace sdqrng {

/// Physical and sampling parameters of the simulated source/detector/tagger
/// chain. Times are in seconds, frequencies in Hz.
struct SimConfig {
  double clock_freq = 1.03e9;
  double mu = 0.3;          // mean photons per gate
  double nu = 0.1;          // detection efficiency
  double dark_prob = 1.0e4 / 1.03e9;
  double jitter_mean = 250e-12;
  double jitter_sigma = 27e-12;
  double dead_time = 200e-9;  // nonparalyzable tagger dead time
  double afterpulse_prob = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t n_cycles = 0;

  // Recorded for provenance only; the detector model has no analog stage.
  double dc_bias_volts = 45.9;
  double gate_amplitude_volts = 6.0;

  double gate_period() const noexcept { return 1.0 / clock_freq; }
  double duration() const noexcept { return static_cast<double>(n_cycles) / clock_freq; }

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  /// Operating point used for the throughput reproduction: 1.03 GHz gating,
  /// 0.3 photons per gate, 10 kHz dark counts, 5 MHz tagger.
  static SimConfig device_defaults();
};

/// Gates in `seconds` of wall time at `clock_freq` (rounded to nearest).
std::uint64_t cycles_for_duration(double seconds, double clock_freq);

/// Per-gate dark probability for a dark count rate in Hz.
double dark_prob_from_rate(double dark_rate_hz, double clock_freq);

std::string describe(const SimConfig& config);

}  // namespace sdqrng
