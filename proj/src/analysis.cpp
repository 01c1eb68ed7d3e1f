#include "sdqrng/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sdqrng/special_functions.hpp"

namespace sdqrng {

void ByteCorrelationMatrix::merge(const ByteCorrelationMatrix& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  n_pairs += other.n_pairs;
}

ByteCorrelationMatrix byte_correlation(const BitStream& bits) {
  if (bits.size() < 16) throw std::domain_error("byte_correlation needs at least 16 bits");
  ByteCorrelationMatrix m;
  const auto bytes = bits.bytes();
  const std::size_t n_bytes = bits.size() / 8;
  for (std::size_t i = 0; i + 1 < n_bytes; ++i) ++m.at(bytes[i], bytes[i + 1]);
  m.n_pairs = n_bytes - 1;
  return m;
}

ChiSquareResult uniformity_chi_square(const ByteCorrelationMatrix& matrix) {
  ChiSquareResult r;
  const double cells = static_cast<double>(matrix.counts.size());
  if (matrix.n_pairs < 5 * matrix.counts.size()) return r;
  const double expected = static_cast<double>(matrix.n_pairs) / cells;
  double chi2 = 0.0;
  for (auto c : matrix.counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  r.statistic = chi2;
  r.p_value = igamc((cells - 1.0) / 2.0, chi2 / 2.0);
  r.applicable = true;
  return r;
}

void write_matrix_csv(const ByteCorrelationMatrix& matrix, std::ostream& out) {
  for (unsigned x = 0; x < 256; ++x) {
    for (unsigned y = 0; y < 256; ++y) {
      if (y) out << ',';
      out << matrix.at(x, y);
    }
    out << '\n';
  }
}

void write_histogram_csv(const Histogram& histogram, std::ostream& out) {
  const auto old = out.precision(12);
  out << "bin_start_ps,count\n";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    out << histogram.bin_start(i) * 1e12 << ',' << histogram.counts[i] << '\n';
  }
  out.precision(old);
}

PeakSummary analyze_peaks(const Histogram& h) {
  PeakSummary s;
  const std::size_t n_bins = h.counts.size();
  if (n_bins == 0) return s;

  for (std::uint64_t g = 0; g < h.n_cycles; ++g) {
    const auto lo = static_cast<std::size_t>(std::ceil(static_cast<double>(g) * h.period / h.bin_width - 1e-9));
    const auto hi = std::min(
        n_bins, static_cast<std::size_t>(std::ceil(static_cast<double>(g + 1) * h.period / h.bin_width - 1e-9)));
    if (lo >= hi) continue;
    const auto first = h.counts.begin() + static_cast<std::ptrdiff_t>(lo);
    const auto last = h.counts.begin() + static_cast<std::ptrdiff_t>(hi);
    const auto peak_it = std::max_element(first, last);
    if (*peak_it == 0) continue;
    const auto peak = static_cast<std::size_t>(peak_it - h.counts.begin());
    const double half = static_cast<double>(*peak_it) / 2.0;
    auto count = [&](std::size_t i) { return static_cast<double>(h.counts[i]); };

    std::size_t left = peak;
    while (left > lo && count(left - 1) > half) --left;
    double x_left = static_cast<double>(left);  // bin-centre units
    if (left > lo) {
      const double c0 = count(left - 1);
      const double c1 = count(left);
      x_left = static_cast<double>(left - 1) + (half - c0) / (c1 - c0);
    }
    std::size_t right = peak;
    while (right + 1 < hi && count(right + 1) > half) ++right;
    double x_right = static_cast<double>(right);
    if (right + 1 < hi) {
      const double c0 = count(right);
      const double c1 = count(right + 1);
      x_right = static_cast<double>(right) + (c0 - half) / (c0 - c1);
    }
    s.fwhm.push_back((x_right - x_left) * h.bin_width);
  }
  if (!s.fwhm.empty()) {
    s.mean_fwhm = std::accumulate(s.fwhm.begin(), s.fwhm.end(), 0.0) / static_cast<double>(s.fwhm.size());
  }

  // Longest circular run of empty bins.
  std::size_t best = 0;
  std::size_t run = 0;
  for (std::size_t i = 0; i < 2 * n_bins; ++i) {
    if (h.counts[i % n_bins] == 0) {
      run = std::min(run + 1, n_bins);
      best = std::max(best, run);
    } else {
      run = 0;
    }
  }
  s.max_zero_gap = static_cast<double>(best) * h.bin_width;
  return s;
}

RunReport run_report(const EventStream& sim, const BitStream& bits,
                     std::optional<BatteryReport> battery, const ReportOptions& options) {
  RunReport r;
  r.config = sim.config;
  r.n_cycles = sim.n_cycles;
  r.event_count = sim.tags.size();
  r.bit_count = bits.size();
  r.bit_rate = sim.n_cycles ? bit_rate(sim) : 0.0;
  r.ones_fraction = bits.empty() ? 0.0 : static_cast<double>(bits.count_ones()) / bits.size();
  r.histogram_bin_width = options.histogram_bin_width;
  r.peaks = analyze_peaks(
      cycle_histogram(sim, options.histogram_bin_width, options.histogram_cycles));
  r.battery = std::move(battery);
  r.stream_bits = options.stream_bits;
  if (bits.size() >= 16) r.correlation = uniformity_chi_square(byte_correlation(bits));
  r.notes = {
      {"battery_tests",
       "15 tests of the current statistical test suite; the withdrawn Lempel-Ziv test is not "
       "implemented, so counts differ from 16-test reports"},
      {"battery_aggregation",
       "a stream passes a test iff all of its p-values are >= alpha; proportions pool every "
       "p-value of a test"},
      {"byte_pairing", "consecutive non-overlapping bytes (B_i, B_i+1), MSB-first"},
      {"dead_time_model", "nonparalyzable"},
  };
  return r;
}

namespace {

std::string fmt(double v, int precision = 10) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace

std::string report_key_values(const RunReport& r) {
  std::ostringstream os;
  const auto& c = r.config;
  os << "config.clock_freq_hz=" << fmt(c.clock_freq) << '\n'
     << "config.mu=" << fmt(c.mu) << '\n'
     << "config.nu=" << fmt(c.nu) << '\n'
     << "config.dark_prob=" << fmt(c.dark_prob) << '\n'
     << "config.jitter_mean_s=" << fmt(c.jitter_mean) << '\n'
     << "config.jitter_sigma_s=" << fmt(c.jitter_sigma) << '\n'
     << "config.dead_time_s=" << fmt(c.dead_time) << '\n'
     << "config.afterpulse_prob=" << fmt(c.afterpulse_prob) << '\n'
     << "config.seed=" << c.seed << '\n'
     << "run.n_cycles=" << r.n_cycles << '\n'
     << "run.duration_s=" << fmt(static_cast<double>(r.n_cycles) / c.clock_freq) << '\n'
     << "run.event_count=" << r.event_count << '\n'
     << "run.bit_count=" << r.bit_count << '\n'
     << "run.bit_rate_bps=" << fmt(r.bit_rate) << '\n'
     << "run.ones_fraction=" << fmt(r.ones_fraction) << '\n'
     << "histogram.bin_width_ps=" << fmt(r.histogram_bin_width * 1e12) << '\n'
     << "histogram.peaks=" << r.peaks.fwhm.size() << '\n'
     << "histogram.mean_fwhm_ps=" << fmt(r.peaks.mean_fwhm * 1e12) << '\n'
     << "histogram.max_zero_gap_ps=" << fmt(r.peaks.max_zero_gap * 1e12) << '\n';
  if (r.battery) {
    const auto& b = *r.battery;
    os << "battery.status=run\n"
       << "battery.alpha=" << fmt(b.alpha) << '\n'
       << "battery.streams=" << b.per_stream.size() << '\n'
       << "battery.stream_bits=" << r.stream_bits << '\n'
       << "battery.all_in_range=" << (b.all_in_range() ? 1 : 0) << '\n';
    for (const auto& row : b.proportions) {
      const std::string k = "battery." + row.test_name;
      if (row.indeterminate) {
        os << k << ".status=indeterminate\n";
        continue;
      }
      os << k << ".applicable_streams=" << row.applicable_streams << '\n'
         << k << ".proportion=" << fmt(row.proportion, 8) << '\n'
         << k << ".stream_pass_fraction=" << fmt(row.stream_pass_fraction(), 8) << '\n'
         << k << ".conf_lo=" << fmt(row.confidence_lo, 8) << '\n'
         << k << ".conf_hi=" << fmt(row.confidence_hi, 8) << '\n'
         << k << ".in_range=" << (row.in_range ? 1 : 0) << '\n';
    }
  } else {
    os << "battery.status=not_applicable\n";
  }
  if (r.correlation.applicable) {
    os << "correlation.status=run\n"
       << "correlation.chi_square=" << fmt(r.correlation.statistic) << '\n'
       << "correlation.p_value=" << fmt(r.correlation.p_value) << '\n';
  } else {
    os << "correlation.status=not_applicable\n";
  }
  for (const auto& [k, v] : r.notes) os << "note." << k << '=' << v << '\n';
  return os.str();
}

std::string report_text(const RunReport& r) {
  std::ostringstream os;
  const auto& c = r.config;
  os << "QRNG simulation run report\n"
     << "==========================\n\n"
     << "Configuration\n"
     << "  clock frequency     " << fmt(c.clock_freq / 1e9, 6) << " GHz\n"
     << "  mu, nu              " << fmt(c.mu, 6) << ", " << fmt(c.nu, 6) << '\n'
     << "  dark probability    " << fmt(c.dark_prob, 6) << " per gate\n"
     << "  jitter              " << fmt(c.jitter_mean * 1e12, 6) << " ps +/- "
     << fmt(c.jitter_sigma * 1e12, 6) << " ps\n"
     << "  dead time           " << fmt(c.dead_time * 1e9, 6) << " ns\n"
     << "  afterpulse prob     " << fmt(c.afterpulse_prob, 6) << '\n'
     << "  seed                " << c.seed << "\n\n"
     << "Events\n"
     << "  gates simulated     " << r.n_cycles << '\n'
     << "  registered events   " << r.event_count << '\n'
     << "  extracted bits      " << r.bit_count << '\n'
     << "  bit rate            " << fmt(r.bit_rate / 1e6, 6) << " Mbit/s\n"
     << "  ones fraction       " << fmt(r.ones_fraction, 8) << "\n\n"
     << "Arrival histogram\n"
     << "  peaks               " << r.peaks.fwhm.size() << '\n'
     << "  mean FWHM           " << fmt(r.peaks.mean_fwhm * 1e12, 5) << " ps\n"
     << "  widest empty gap    " << fmt(r.peaks.max_zero_gap * 1e12, 5) << " ps\n\n";
  os << "Statistical battery\n";
  if (r.battery) {
    const auto& b = *r.battery;
    os << "  " << b.per_stream.size() << " streams of " << r.stream_bits << " bits, alpha "
       << fmt(b.alpha, 4) << '\n';
    for (const auto& row : b.proportions) {
      os << "  " << row.test_name;
      for (std::size_t pad = row.test_name.size(); pad < 28; ++pad) os << ' ';
      if (row.indeterminate) {
        os << "indeterminate\n";
        continue;
      }
      os << fmt(row.proportion, 5) << "  [" << fmt(row.confidence_lo, 5) << ", "
         << fmt(row.confidence_hi, 5) << "]  " << (row.in_range ? "ok" : "OUT OF RANGE") << '\n';
    }
  } else {
    os << "  not run (not enough bits)\n";
  }
  os << "\nByte correlation\n";
  if (r.correlation.applicable) {
    os << "  chi-square " << fmt(r.correlation.statistic, 8) << " (65535 dof), p = "
       << fmt(r.correlation.p_value, 6) << '\n';
  } else {
    os << "  not applicable (fewer than 327680 byte pairs)\n";
  }
  os << "\nNotes\n";
  for (const auto& [k, v] : r.notes) os << "  " << k << ": " << v << '\n';
  return os.str();
}

}  // namespace sdqrng
