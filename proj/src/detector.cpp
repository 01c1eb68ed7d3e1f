#include "sdqrng/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sdqrng {

double gate_detection_prob(double mu, double nu, double dark_prob) {
  if (!(mu >= 0.0) || !(nu >= 0.0) || !(dark_prob >= 0.0) || !(dark_prob < 1.0)) {
    throw std::domain_error("gate_detection_prob: need mu, nu >= 0 and 0 <= dark_prob < 1");
  }
  // 1 - (1-d) e^{-x} = d + (1-d)(1 - e^{-x}), written to keep precision at small x.
  const double light = -std::expm1(-mu * nu);
  return dark_prob + (1.0 - dark_prob) * light;
}

GateSimulator::GateSimulator(const SimConfig& config) : config_(config), rng_(config.seed) {
  config_.validate();
  p_gate_ = gate_detection_prob(config_.mu, config_.nu, config_.dark_prob);
  p_after_ = p_gate_ + config_.afterpulse_prob * (1.0 - p_gate_);
  period_ = config_.gate_period();
  if (p_gate_ > 0.0 && p_gate_ < 1.0) inv_log_miss_ = 1.0 / std::log1p(-p_gate_);
}

double GateSimulator::draw_offset() {
  if (config_.jitter_sigma == 0.0) return config_.jitter_mean;
  for (;;) {
    const double t = config_.jitter_mean + config_.jitter_sigma * rng_.normal();
    if (t >= 0.0 && t < period_) return t;
  }
}

std::optional<TimeTag> GateSimulator::next() {
  const std::uint64_t n = config_.n_cycles;
  while (position_ < n) {
    std::uint64_t gate = 0;
    bool registered = false;
    if (previous_fired_ && config_.afterpulse_prob > 0.0) {
      // One-gate memory: the gate after an avalanche is decided on its own.
      gate = position_;
      if (rng_.uniform() >= p_after_) {
        previous_fired_ = false;
        ++position_;
        continue;
      }
      registered = false;
    } else {
      if (p_gate_ <= 0.0) {
        position_ = n;
        break;
      }
      std::uint64_t skip = 0;
      if (p_gate_ < 1.0) {
        const double g = std::floor(std::log(rng_.uniform_open_zero()) * inv_log_miss_);
        if (!(g < static_cast<double>(n - position_))) {
          position_ = n;
          break;
        }
        skip = static_cast<std::uint64_t>(g);
      }
      gate = position_ + skip;
      registered = skip > 0 || !previous_fired_;
    }
    ++avalanches_;
    position_ = gate + 1;
    previous_fired_ = true;
    if (registered) return TimeTag{gate, draw_offset()};
  }
  return std::nullopt;
}

DeadTimeFilter::DeadTimeFilter(double dead_time, double clock_freq)
    : dead_time_(dead_time), period_(1.0 / clock_freq) {
  if (!(dead_time >= 0.0)) throw std::domain_error("dead_time must be >= 0");
  if (!(clock_freq > 0.0)) throw std::domain_error("clock_freq must be positive");
}

bool DeadTimeFilter::accept(const TimeTag& tag) noexcept {
  if (have_last_) {
    // Difference taken in (cycles, offset) form so absolute times of ~1e10
    // gates keep sub-femtosecond resolution.
    const double elapsed = static_cast<double>(tag.cycle_index - last_.cycle_index) * period_ +
                           (tag.offset - last_.offset);
    if (elapsed < dead_time_ - 1e-18) return false;
  }
  have_last_ = true;
  last_ = tag;
  return true;
}

EventStream simulate_gates(const SimConfig& config) {
  EventStream out;
  out.config = config;
  out.n_cycles = config.n_cycles;
  GateSimulator gates(config);
  while (auto tag = gates.next()) out.tags.push_back(*tag);
  return out;
}

EventStream apply_dead_time(const EventStream& stream, double dead_time) {
  DeadTimeFilter tagger(dead_time, stream.config.clock_freq);
  EventStream out;
  out.config = stream.config;
  out.config.dead_time = dead_time;
  out.n_cycles = stream.n_cycles;
  std::copy_if(stream.tags.begin(), stream.tags.end(), std::back_inserter(out.tags),
               [&](const TimeTag& t) { return tagger.accept(t); });
  return out;
}

Histogram::Histogram(double bin_width_, double period_, std::uint64_t n_cycles_displayed)
    : bin_width(bin_width_), period(period_), n_cycles(n_cycles_displayed) {
  if (!(bin_width > 0.0)) throw std::domain_error("histogram bin_width must be positive");
  if (!(period > 0.0)) throw std::domain_error("histogram period must be positive");
  if (n_cycles == 0) throw std::domain_error("histogram needs at least one displayed cycle");
  counts.assign(static_cast<std::size_t>(std::ceil(window() / bin_width - 1e-9)), 0);
}

void Histogram::add(const TimeTag& tag) {
  const double t = static_cast<double>(tag.cycle_index % n_cycles) * period + tag.offset;
  auto bin = static_cast<std::size_t>(t / bin_width);
  if (bin >= counts.size()) bin = counts.size() - 1;
  ++counts[bin];
}

std::uint64_t Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

Histogram cycle_histogram(const EventStream& stream, double bin_width,
                          std::uint64_t n_cycles_displayed) {
  Histogram h(bin_width, stream.config.gate_period(), n_cycles_displayed);
  for (const auto& tag : stream.tags) h.add(tag);
  return h;
}

}  // namespace sdqrng
