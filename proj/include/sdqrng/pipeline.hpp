#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "sdqrng/bitstream.hpp"
#include "sdqrng/detector.hpp"

namespace sdqrng {

struct PipelineOptions {
  bool keep_events = false;
  /// Arrival histogram accumulated on the fly when set.
  std::optional<double> histogram_bin_width;
  std::uint64_t histogram_cycles = 2;
  /// Called for each kept event, e.g. to stream it to a file.
  std::function<void(const TimeTag&)> on_event;
};

struct PipelineResult {
  EventStream events;  // tags only populated with keep_events
  BitStream bits;
  std::uint64_t registered = 0;  // after self-differencing, before dead time
  std::uint64_t avalanches = 0;
  std::optional<Histogram> histogram;

  std::uint64_t kept() const noexcept { return bits.size(); }
};

/// Gates -> self-differencing -> dead time -> even/odd extraction in one pass.
/// Bits are identical to extract_bits(apply_dead_time(simulate_gates(c),
/// c.dead_time)).
PipelineResult run_pipeline(const SimConfig& config, const PipelineOptions& options = {});

}  // namespace sdqrng
