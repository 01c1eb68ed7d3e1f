#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdqrng/battery.hpp"
#include "sdqrng/bitstream.hpp"
#include "sdqrng/detector.hpp"

namespace sdqrng {

/// Counts of consecutive non-overlapping byte pairs (B_i, B_{i+1}).
struct ByteCorrelationMatrix {
  std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(256 * 256, 0);
  std::uint64_t n_pairs = 0;

  std::uint64_t at(unsigned first, unsigned second) const { return counts[first * 256 + second]; }
  std::uint64_t& at(unsigned first, unsigned second) { return counts[first * 256 + second]; }
  /// Accumulates another shard's pairs; the pair spanning the shard boundary
  /// is the caller's responsibility.
  void merge(const ByteCorrelationMatrix& other);
};

/// Bytes are taken MSB-first from the stream; trailing bits that do not fill
/// a byte are ignored. Throws std::domain_error for fewer than 16 bits.
ByteCorrelationMatrix byte_correlation(const BitStream& bits);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 0.0;
  bool applicable = false;
};

/// Pearson chi-square of the matrix against a uniform expectation
/// (65535 degrees of freedom). Not applicable below 5 * 65536 pairs.
ChiSquareResult uniformity_chi_square(const ByteCorrelationMatrix& matrix);

/// 256 lines of 256 comma-separated counts; line = first byte.
void write_matrix_csv(const ByteCorrelationMatrix& matrix, std::ostream& out);

/// CSV: bin_start_ps,count
void write_histogram_csv(const Histogram& histogram, std::ostream& out);

struct PeakSummary {
  std::vector<double> fwhm;  // seconds, one per displayed gate with counts
  double mean_fwhm = 0.0;
  double max_zero_gap = 0.0;  // longest empty stretch, wrapping around the window
};

/// Half-maximum widths (linear interpolation between bins) of the peak in
/// each displayed gate, and the widest run of empty bins.
PeakSummary analyze_peaks(const Histogram& histogram);

struct RunReport {
  SimConfig config;
  std::uint64_t n_cycles = 0;
  std::uint64_t event_count = 0;
  std::uint64_t bit_count = 0;
  double bit_rate = 0.0;
  double ones_fraction = 0.0;
  double histogram_bin_width = 0.0;
  PeakSummary peaks;
  std::optional<BatteryReport> battery;
  std::size_t stream_bits = 0;
  ChiSquareResult correlation;
  std::vector<std::pair<std::string, std::string>> notes;
};

struct ReportOptions {
  double histogram_bin_width = 1e-12;
  std::uint64_t histogram_cycles = 2;
  std::size_t stream_bits = 0;
};

/// Assembles a run summary. `battery` may be absent (too few bits to test),
/// in which case the report marks the battery as not run.
RunReport run_report(const EventStream& sim, const BitStream& bits,
                     std::optional<BatteryReport> battery, const ReportOptions& options = {});

/// Human-readable report.
std::string report_text(const RunReport& report);
/// Flat key=value lines; keys are stable and documented in the README.
std::string report_key_values(const RunReport& report);

}  // namespace sdqrng
