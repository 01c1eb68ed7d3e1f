#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sdqrng/nist_tests.hpp"

namespace sdqrng {

struct StreamResults {
  std::size_t stream_id = 0;
  std::vector<TestResult> results;
};

/// Pass statistics for one test (p_value_index < 0) or for one p-value slot
/// of a test across all streams where it was applicable.
struct ProportionRow {
  std::string test_name;
  int p_value_index = -1;
  std::size_t applicable_streams = 0;
  std::size_t passing_streams = 0;  // streams with every p-value >= alpha
  std::size_t p_value_count = 0;
  std::size_t p_value_passes = 0;
  /// Fraction of the row's p-values that are >= alpha. For single-p-value
  /// tests this equals the fraction of passing streams.
  double proportion = 0.0;
  double confidence_lo = 0.0;
  double confidence_hi = 1.0;
  bool indeterminate = true;  // no applicable stream
  bool in_range = false;
  /// Chi-square uniformity of the row's p-values over ten bins.
  double uniformity_p = 0.0;

  double stream_pass_fraction() const {
    return applicable_streams ? static_cast<double>(passing_streams) / applicable_streams : 0.0;
  }
};

struct BatteryReport {
  double alpha = 0.01;
  std::vector<StreamResults> per_stream;
  std::vector<ProportionRow> proportions;   // one per test, battery order
  std::vector<ProportionRow> per_p_value;   // one per (test, p-value index)

  bool all_in_range() const;
};

/// (1 - alpha) -/+ 3 sqrt(alpha (1 - alpha) / m), clamped to [0, 1].
std::pair<double, double> proportion_interval(double alpha, std::size_t m);

/// Aggregates per-stream battery results. Needs at least two streams; a test
/// with no applicable stream is reported as indeterminate.
BatteryReport proportion_analysis(std::vector<StreamResults> streams, double alpha);

/// Splits `bits` into `n_streams` disjoint consecutive substreams of
/// `stream_bits` bits, runs the battery on each using up to `jobs` threads,
/// and aggregates. Output does not depend on `jobs`.
BatteryReport run_battery_on_streams(const BitStream& bits, std::size_t n_streams,
                                     std::size_t stream_bits, double alpha, unsigned jobs = 1,
                                     const BatteryParams& params = {});

/// stream_id,test_name,p_value_index,p_value,passed,applicable
void write_results_csv(const BatteryReport& report, std::ostream& out);
/// test_name,proportion,conf_lo,conf_hi,in_range
void write_summary_csv(const BatteryReport& report, std::ostream& out);
/// test_name,p_value_index,applicable_streams,proportion,conf_lo,conf_hi,in_range,uniformity_p
void write_p_value_summary_csv(const BatteryReport& report, std::ostream& out);

}  // namespace sdqrng
