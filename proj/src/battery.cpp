#include "sdqrng/battery.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "sdqrng/special_functions.hpp"

namespace sdqrng {

std::pair<double, double> proportion_interval(double alpha, std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must be in (0, 1)");
  if (m == 0) throw std::domain_error("proportion interval needs at least one stream");
  const double centre = 1.0 - alpha;
  const double half = 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(m));
  return {std::clamp(centre - half, 0.0, 1.0), std::clamp(centre + half, 0.0, 1.0)};
}

bool BatteryReport::all_in_range() const {
  return std::all_of(proportions.begin(), proportions.end(),
                     [](const ProportionRow& r) { return r.indeterminate || r.in_range; });
}

namespace {

struct Accumulator {
  std::size_t applicable = 0;
  std::size_t passing = 0;
  std::size_t count = 0;
  std::size_t passes = 0;
  std::array<std::size_t, 10> bins{};

  void add_p(double p, double alpha) {
    ++count;
    if (p >= alpha) ++passes;
    ++bins[std::min<std::size_t>(9, static_cast<std::size_t>(p * 10.0))];
  }
};

ProportionRow finish_row(std::string name, int index, const Accumulator& acc, double alpha) {
  ProportionRow row;
  row.test_name = std::move(name);
  row.p_value_index = index;
  row.applicable_streams = acc.applicable;
  row.passing_streams = acc.passing;
  row.p_value_count = acc.count;
  row.p_value_passes = acc.passes;
  row.indeterminate = acc.applicable == 0 || acc.count == 0;
  if (row.indeterminate) return row;
  row.proportion = static_cast<double>(acc.passes) / static_cast<double>(acc.count);
  std::tie(row.confidence_lo, row.confidence_hi) = proportion_interval(alpha, acc.applicable);
  row.in_range = row.proportion >= row.confidence_lo && row.proportion <= row.confidence_hi;
  const double expected = static_cast<double>(acc.count) / 10.0;
  double chi2 = 0.0;
  for (auto b : acc.bins) chi2 += (static_cast<double>(b) - expected) * (static_cast<double>(b) - expected) / expected;
  row.uniformity_p = igamc(4.5, chi2 / 2.0);
  return row;
}

}  // namespace

BatteryReport proportion_analysis(std::vector<StreamResults> streams, double alpha) {
  if (streams.size() < 2) throw std::domain_error("proportion_analysis needs at least two streams");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must be in (0, 1)");

  // Test order follows first appearance.
  std::vector<std::string> order;
  std::map<std::string, Accumulator> per_test;
  std::map<std::pair<std::string, int>, Accumulator> per_slot;
  for (const auto& s : streams) {
    for (const auto& r : s.results) {
      if (std::find(order.begin(), order.end(), r.test_name) == order.end()) {
        order.push_back(r.test_name);
      }
      auto& acc = per_test[r.test_name];
      if (!r.applicable) continue;
      ++acc.applicable;
      const bool stream_pass = std::all_of(r.p_values.begin(), r.p_values.end(),
                                           [&](double p) { return p >= alpha; });
      if (stream_pass) ++acc.passing;
      for (std::size_t i = 0; i < r.p_values.size(); ++i) {
        acc.add_p(r.p_values[i], alpha);
        auto& slot = per_slot[{r.test_name, static_cast<int>(i)}];
        ++slot.applicable;
        if (r.p_values[i] >= alpha) ++slot.passing;
        slot.add_p(r.p_values[i], alpha);
      }
    }
  }

  BatteryReport report;
  report.alpha = alpha;
  for (const auto& name : order) {
    report.proportions.push_back(finish_row(name, -1, per_test[name], alpha));
    for (auto it = per_slot.lower_bound({name, 0}); it != per_slot.end() && it->first.first == name;
         ++it) {
      report.per_p_value.push_back(finish_row(name, it->first.second, it->second, alpha));
    }
  }
  for (auto& s : streams) {
    for (auto& r : s.results) r.decide(alpha);
  }
  report.per_stream = std::move(streams);
  return report;
}

BatteryReport run_battery_on_streams(const BitStream& bits, std::size_t n_streams,
                                     std::size_t stream_bits, double alpha, unsigned jobs,
                                     const BatteryParams& params) {
  if (stream_bits == 0) throw std::domain_error("stream_bits must be positive");
  if (n_streams > bits.size() / stream_bits) {
    throw std::domain_error("not enough bits for " + std::to_string(n_streams) + " streams of " +
                            std::to_string(stream_bits) + " bits");
  }
  std::vector<StreamResults> results(n_streams);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n_streams; i = next++) {
      try {
        results[i].stream_id = i;
        results[i].results = battery(bits.slice(i * stream_bits, stream_bits), alpha, params);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n_streams)));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return proportion_analysis(std::move(results), alpha);
}

void write_results_csv(const BatteryReport& report, std::ostream& out) {
  const auto old = out.precision(10);
  out << "stream_id,test_name,p_value_index,p_value,passed,applicable\n";
  for (const auto& s : report.per_stream) {
    for (const auto& r : s.results) {
      if (r.p_values.empty()) {
        out << s.stream_id << ',' << r.test_name << ",0,," << (r.passed ? 1 : 0) << ','
            << (r.applicable ? 1 : 0) << '\n';
        continue;
      }
      for (std::size_t i = 0; i < r.p_values.size(); ++i) {
        out << s.stream_id << ',' << r.test_name << ',' << i << ',' << r.p_values[i] << ','
            << (r.p_values[i] >= report.alpha ? 1 : 0) << ',' << (r.applicable ? 1 : 0) << '\n';
      }
    }
  }
  out.precision(old);
}

void write_summary_csv(const BatteryReport& report, std::ostream& out) {
  const auto old = out.precision(8);
  out << "test_name,proportion,conf_lo,conf_hi,in_range\n";
  for (const auto& row : report.proportions) {
    out << row.test_name << ',';
    if (row.indeterminate) {
      out << ",,,indeterminate\n";
      continue;
    }
    out << row.proportion << ',' << row.confidence_lo << ',' << row.confidence_hi << ','
        << (row.in_range ? 1 : 0) << '\n';
  }
  out.precision(old);
}

void write_p_value_summary_csv(const BatteryReport& report, std::ostream& out) {
  const auto old = out.precision(8);
  out << "test_name,p_value_index,applicable_streams,proportion,conf_lo,conf_hi,in_range,"
         "uniformity_p\n";
  for (const auto& row : report.per_p_value) {
    out << row.test_name << ',' << row.p_value_index << ',' << row.applicable_streams << ','
        << row.proportion << ',' << row.confidence_lo << ',' << row.confidence_hi << ','
        << (row.in_range ? 1 : 0) << ',' << row.uniformity_p << '\n';
  }
  out.precision(old);
}

}  // namespace sdqrng
