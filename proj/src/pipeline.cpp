#include "sdqrng/pipeline.hpp"

namespace sdqrng {

PipelineResult run_pipeline(const SimConfig& config, const PipelineOptions& options) {
  PipelineResult out;
  out.events.config = config;
  out.events.n_cycles = config.n_cycles;
  if (options.histogram_bin_width) {
    out.histogram.emplace(*options.histogram_bin_width, config.gate_period(),
                          options.histogram_cycles);
  }

  GateSimulator gates(config);
  DeadTimeFilter tagger(config.dead_time, config.clock_freq);
  while (auto tag = gates.next()) {
    ++out.registered;
    if (!tagger.accept(*tag)) continue;
    out.bits.push_back(parity_bit(*tag));
    if (out.histogram) out.histogram->add(*tag);
    if (options.keep_events) out.events.tags.push_back(*tag);
    if (options.on_event) options.on_event(*tag);
  }
  out.avalanches = gates.avalanche_count();
  return out;
}

}  // namespace sdqrng
