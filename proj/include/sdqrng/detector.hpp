#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdqrng/config.hpp"
#include "sdqrng/rng.hpp"

namespace sdqrng {

/// One registered detection: the gate it fell in and the arrival time
/// measured from the start of that gate (seconds, in [0, gate period)).
struct TimeTag {
  std::uint64_t cycle_index = 0;
  double offset = 0.0;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

struct EventStream {
  SimConfig config;
  std::vector<TimeTag> tags;  // strictly increasing cycle_index
  std::uint64_t n_cycles = 0;

  friend bool operator==(const EventStream& a, const EventStream& b) {
    return a.tags == b.tags && a.n_cycles == b.n_cycles;
  }
};

/// Probability that a gate avalanches: 1 - (1 - dark_prob) exp(-mu nu).
/// Throws std::domain_error for negative arguments or dark_prob >= 1.
double gate_detection_prob(double mu, double nu, double dark_prob);

/// Streams the events that survive self-differencing for one configuration.
///
/// Each gate avalanches independently with probability
/// gate_detection_prob(mu, nu, dark_prob); after an avalanche the next gate
/// also re-fires with afterpulse_prob. Gate k is registered iff it avalanches
/// and gate k-1 does not (gate 0 has a silent predecessor). Silent stretches
/// are skipped with geometric draws, so cost scales with the avalanche count
/// rather than the gate count.
class GateSimulator {
 public:
  explicit GateSimulator(const SimConfig& config);

  /// Next registered event, or nullopt once n_cycles gates are exhausted.
  std::optional<TimeTag> next();

  /// Avalanches generated so far (registered or cancelled).
  std::uint64_t avalanche_count() const noexcept { return avalanches_; }

 private:
  double draw_offset();

  SimConfig config_;
  Xoshiro256 rng_;
  double p_gate_ = 0.0;
  double p_after_ = 0.0;      // avalanche probability in the gate after an avalanche
  double inv_log_miss_ = 0.0;  // 1 / log(1 - p_gate)
  double period_ = 0.0;
  std::uint64_t position_ = 0;     // first gate not yet decided
  bool previous_fired_ = false;    // did gate position_-1 avalanche?
  std::uint64_t avalanches_ = 0;
};

/// Nonparalyzable dead time: an event is kept iff it arrives at least
/// `dead_time` after the last kept event. Dropped events do not extend it.
class DeadTimeFilter {
 public:
  DeadTimeFilter(double dead_time, double clock_freq);

  bool accept(const TimeTag& tag) noexcept;

 private:
  double dead_time_;
  double period_;
  bool have_last_ = false;
  TimeTag last_{};
};

/// All registered events for `config` (before tagger dead time).
EventStream simulate_gates(const SimConfig& config);

/// Ordered subset of `stream` that survives a nonparalyzable dead time.
/// Throws std::domain_error if dead_time < 0.
EventStream apply_dead_time(const EventStream& stream, double dead_time);

/// Calls `sink(tag)` for every event that survives both self-differencing and
/// config.dead_time. Equivalent to apply_dead_time(simulate_gates(c),
/// c.dead_time) without materializing the intermediate stream.
template <class Sink>
void simulate_tagged(const SimConfig& config, Sink&& sink) {
  GateSimulator gates(config);
  DeadTimeFilter tagger(config.dead_time, config.clock_freq);
  while (auto tag = gates.next()) {
    if (tagger.accept(*tag)) sink(*tag);
  }
}

/// Arrival-time histogram folded over a window of `n_cycles` gates.
struct Histogram {
  double bin_width = 0.0;
  double period = 0.0;
  std::uint64_t n_cycles = 1;
  std::vector<std::uint64_t> counts;

  double window() const noexcept { return period * static_cast<double>(n_cycles); }
  double bin_start(std::size_t i) const noexcept { return static_cast<double>(i) * bin_width; }
  std::uint64_t total() const noexcept;

  Histogram(double bin_width, double period, std::uint64_t n_cycles_displayed);
  void add(const TimeTag& tag);
};

/// Histogram of event times folded over `n_cycles_displayed` gates. Every bin
/// covering the window is present, including empty inter-gate bins.
Histogram cycle_histogram(const EventStream& stream, double bin_width,
                          std::uint64_t n_cycles_displayed);

}  // namespace sdqrng
