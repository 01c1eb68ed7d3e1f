#include "sdqrng/config.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sdqrng {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid SimConfig: ") + what);
}

}  // namespace

void SimConfig::validate() const {
  require(std::isfinite(clock_freq) && clock_freq > 0.0, "clock_freq must be positive");
  require(std::isfinite(mu) && mu >= 0.0, "mu must be >= 0");
  require(std::isfinite(nu) && nu >= 0.0 && nu <= 1.0, "nu must be in [0, 1]");
  require(std::isfinite(dark_prob) && dark_prob >= 0.0 && dark_prob < 1.0,
          "dark_prob must be in [0, 1)");
  require(std::isfinite(afterpulse_prob) && afterpulse_prob >= 0.0 && afterpulse_prob < 1.0,
          "afterpulse_prob must be in [0, 1)");
  require(std::isfinite(jitter_sigma) && jitter_sigma >= 0.0, "jitter_sigma must be >= 0");
  require(std::isfinite(jitter_mean) && jitter_mean >= 0.0, "jitter_mean must be >= 0");
  require(jitter_mean + 5.0 * jitter_sigma < gate_period(),
          "jitter_mean + 5 jitter_sigma must stay inside the gate period");
  require(std::isfinite(dead_time) && dead_time >= 0.0, "dead_time must be >= 0");
}

SimConfig SimConfig::device_defaults() {
  SimConfig c;
  c.clock_freq = 1.03e9;
  c.mu = 0.3;
  c.nu = 0.1;
  c.dark_prob = dark_prob_from_rate(1.0e4, c.clock_freq);
  c.dead_time = 1.0 / 5.0e6;
  return c;
}

std::uint64_t cycles_for_duration(double seconds, double clock_freq) {
  if (!(seconds >= 0.0) || !std::isfinite(seconds)) {
    throw std::invalid_argument("duration must be a finite non-negative number of seconds");
  }
  if (!(clock_freq > 0.0)) throw std::invalid_argument("clock_freq must be positive");
  return static_cast<std::uint64_t>(std::llround(seconds * clock_freq));
}

double dark_prob_from_rate(double dark_rate_hz, double clock_freq) {
  if (!(dark_rate_hz >= 0.0) || !(clock_freq > 0.0) || dark_rate_hz >= clock_freq) {
    throw std::invalid_argument("dark rate must be in [0, clock_freq)");
  }
  return dark_rate_hz / clock_freq;
}

std::string describe(const SimConfig& c) {
  std::ostringstream os;
  os.precision(10);
  os << "clock_freq_hz=" << c.clock_freq << '\n'
     << "mu=" << c.mu << '\n'
     << "nu=" << c.nu << '\n'
     << "dark_prob=" << c.dark_prob << '\n'
     << "jitter_mean_s=" << c.jitter_mean << '\n'
     << "jitter_sigma_s=" << c.jitter_sigma << '\n'
     << "dead_time_s=" << c.dead_time << '\n'
     << "afterpulse_prob=" << c.afterpulse_prob << '\n'
     << "seed=" << c.seed << '\n'
     << "n_cycles=" << c.n_cycles << '\n'
     << "dc_bias_volts=" << c.dc_bias_volts << '\n'
     << "gate_amplitude_volts=" << c.gate_amplitude_volts << '\n';
  return os.str();
}

}  // namespace sdqrng
