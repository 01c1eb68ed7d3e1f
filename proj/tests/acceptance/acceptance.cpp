// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "constant_bits.hpp"
#include "sdqrng/analysis.hpp"
#include "sdqrng/battery.hpp"
#include "sdqrng/pipeline.hpp"
#include "sdqrng/rate_model.hpp"

using namespace sdqrng;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kRateTarget = 4.0e6;
constexpr double kRateTolerance = 0.5e6;
constexpr double kThroughputSeconds = 2.0;
constexpr double kThroughputRuntimeLimit = 60.0;
constexpr double kPeakRelTol = 0.01;
constexpr double kReportedPeak = 250e6;
constexpr double kReportedPeakTol = 10e6;
constexpr double kSweepRuntimeLimit = 1.0;
constexpr double kMcSigmas = 4.0;
constexpr std::uint64_t kGatesPerPoint = 10'000'000;
constexpr double kCurveRuntimeLimit = 120.0;
constexpr double kFwhmLo = 60e-12, kFwhmHi = 70e-12;
constexpr double kMinZeroGap = 600e-12;
constexpr std::uint64_t kMinHistogramEvents = 1'000'000;
constexpr double kKnownAnswerTol = 1e-4;
constexpr double kZerosMaxP = 1e-6;
constexpr std::size_t kStreams = 100;
constexpr std::size_t kStreamBits = 1'000'000;
constexpr double kAlpha = 0.01;
constexpr double kMinProportion = 0.960;
constexpr double kBand500Lo = 0.97665;
constexpr double kBandTol = 1e-5;
constexpr double kBatteryRuntimeLimit = 1800.0;
constexpr std::size_t kBiasBits = 10'000'000;
constexpr std::size_t kCorrelationBits = 100'000'000;
constexpr double kCorrelationLo = 0.001, kCorrelationHi = 0.999;

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void info(const std::string& what) {
  std::printf("       %s\n", what.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// nu giving a dead-time-limited rate of `target` at the default device
// parameters (rate rises monotonically with nu below the p = 1/2 peak).
double solve_nu(double target) {
  const auto c = SimConfig::device_defaults();
  auto out_rate = [&](double nu) {
    return dead_time_limited_rate(sd_rate(c.clock_freq, c.mu * nu, c.dark_prob), c.dead_time);
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (out_rate(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void throughput() {
  auto c = SimConfig::device_defaults();
  c.n_cycles = cycles_for_duration(kThroughputSeconds, c.clock_freq);
  c.seed = 20080101;
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t kept = 0;
  simulate_tagged(c, [&](const TimeTag&) { ++kept; });
  const double runtime = seconds_since(t0);
  const double rate = static_cast<double>(kept) * c.clock_freq / static_cast<double>(c.n_cycles);
  const double p = gate_detection_prob(c.mu, c.nu, c.dark_prob);
  const double predicted = dead_time_limited_rate(c.clock_freq * p * (1 - p), c.dead_time);
  verdict(1, std::abs(rate - kRateTarget) <= kRateTolerance && runtime < kThroughputRuntimeLimit,
          fmt("throughput %.4f Mbit/s over %.0f s simulated (target 4.0 +/- 0.5), runtime %.1f s",
              rate / 1e6, kThroughputSeconds, runtime));
  info(fmt("nu = %.3f; predicted R/(1+R tau) = %.4f Mbit/s; nu solving 4.01 Mbit/s = %.5f",
           c.nu, predicted / 1e6, solve_nu(4.01e6)));
}

void theory_peak() {
  const double f = 1.03e9;
  const auto t0 = std::chrono::steady_clock::now();
  const auto sweep = sweep_rate(f, 1e-3, 1e2, 200, 0.0, 200e-9);
  const auto [x, peak] = find_peak(sweep.theory);
  const double runtime = seconds_since(t0);
  const bool ok = std::abs(peak - f / 4) <= kPeakRelTol * f / 4 &&
                  std::abs(peak - kReportedPeak) <= kReportedPeakTol && runtime < kSweepRuntimeLimit;
  verdict(2, ok, fmt("theory peak %.3f MHz at mu*nu = %.4f (f/4 = %.3f MHz +/- 1%%, reported ~250 +/- 10 MHz), "
                     "runtime %.3f s",
                     peak / 1e6, x, f / 4e6, runtime));
}

void rate_curve() {
  const double f = 1.03e9;
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double mu_nu = std::pow(10.0, -2.0 + 3.0 * i / 9.0);
    SimConfig c;
    c.clock_freq = f;
    c.mu = mu_nu;
    c.nu = 1.0;
    c.dark_prob = 0.0;
    c.dead_time = 0.0;
    c.n_cycles = kGatesPerPoint;
    c.seed = substream_seed(31337, static_cast<std::uint64_t>(i));
    GateSimulator gates(c);
    std::uint64_t registered = 0;
    while (gates.next()) ++registered;
    const double n = static_cast<double>(kGatesPerPoint);
    const double q = sd_rate(f, mu_nu, 0.0) / f;
    // Adjacent registrations are mutually exclusive; lags >= 2 independent.
    const double sd = std::sqrt(n * (q * (1 - q) - 2 * q * q));
    const double z = (static_cast<double>(registered) - n * q) / sd;
    worst = std::max(worst, std::abs(z));
    ok = ok && std::abs(z) < kMcSigmas;
    info(fmt("mu*nu = %8.4f  simulated %.6e Hz  sd_rate %.6e Hz  z = %+.2f", mu_nu,
             static_cast<double>(registered) / n * f, q * f, z));
  }
  const double runtime = seconds_since(t0);
  verdict(3, ok && runtime < kCurveRuntimeLimit,
          fmt("10 grid points x 1e7 gates, max |z| = %.2f (< 4), runtime %.1f s", worst, runtime));
}

void histogram() {
  auto c = SimConfig::device_defaults();
  c.seed = 2;
  c.n_cycles = static_cast<std::uint64_t>(1.2 * kMinHistogramEvents / 4.0e6 * c.clock_freq);
  PipelineOptions opt;
  opt.histogram_bin_width = 1e-12;
  opt.histogram_cycles = 2;
  const auto r = run_pipeline(c, opt);
  const auto peaks = analyze_peaks(*r.histogram);
  const bool fwhm_ok = peaks.fwhm.size() == 2 &&
                       std::all_of(peaks.fwhm.begin(), peaks.fwhm.end(),
                                   [](double w) { return w >= kFwhmLo && w <= kFwhmHi; });
  verdict(4, fwhm_ok && peaks.max_zero_gap >= kMinZeroGap && r.kept() >= kMinHistogramEvents,
          fmt("%llu events, FWHM %.2f / %.2f ps (60-70 ps), widest empty window %.0f ps (>= 600 ps)",
              static_cast<unsigned long long>(r.kept()), peaks.fwhm.size() > 0 ? peaks.fwhm[0] * 1e12 : 0.0,
              peaks.fwhm.size() > 1 ? peaks.fwhm[1] * 1e12 : 0.0, peaks.max_zero_gap * 1e12));
}

struct KnownAnswer {
  std::string label;
  std::function<TestResult()> run;
  std::size_t index;
  double expected;
};

void known_answers() {
  using testing::Constant;
  using testing::constant_bits;
  TestOptions small;
  small.enforce_size = false;
  auto s = [](const char* t) { return BitStream::from_string(t); };
  const auto e = constant_bits(Constant::e, 1'000'000);
  const auto pi = constant_bits(Constant::pi, 100);
  static const std::uint32_t b001[] = {0b001};

  std::vector<KnownAnswer> cases = {
      {"frequency 1011010101", [&] { return frequency_monobit(s("1011010101"), small); }, 0, 0.527089},
      {"block_frequency 0110011010 M=3", [&] { return block_frequency(s("0110011010"), 3, small); }, 0, 0.801252},
      {"cusum 1011010111", [&] { return cumulative_sums(s("1011010111"), small); }, 0, 0.4116588},
      {"runs 1001101011", [&] { return runs_test(s("1001101011"), small); }, 0, 0.147232},
      {"longest_run 128-bit example",
       [&] {
         return longest_run_of_ones(s("1100110000010101011011000100110011100000000000100100110101010001000100"
                                      "1111010110100000001101011111001100111001101101100010110010"),
                                    small);
       },
       0, 0.180609},
      {"non_overlapping B=001", [&] { return non_overlapping_template(s("10100100101110010110"), b001, 3, 2, small); }, 0, 0.344154},
      {"approximate_entropy m=3", [&] { return approximate_entropy(s("0100110101"), 3, small); }, 0, 0.261961},
      {"serial m=3 p1", [&] { return serial_test(s("0011011101"), 3, small); }, 0, 0.808792},
      {"serial m=3 p2", [&] { return serial_test(s("0011011101"), 3, small); }, 1, 0.670320},
      {"random_excursions x=+1", [&] { return random_excursions(s("0110110101"), small); }, 4, 0.502529},
      {"random_excursions_variant x=+1", [&] { return random_excursions_variant(s("0110110101"), small); }, 9, 0.683091},
      {"pi frequency", [&] { return frequency_monobit(pi, small); }, 0, 0.109599},
      {"pi block_frequency M=10", [&] { return block_frequency(pi, 10, small); }, 0, 0.706438},
      {"pi cusum forward", [&] { return cumulative_sums(pi, small); }, 0, 0.219194},
      {"pi cusum reverse", [&] { return cumulative_sums(pi, small); }, 1, 0.114866},
      {"pi runs", [&] { return runs_test(pi, small); }, 0, 0.500798},
      {"pi approximate_entropy m=2", [&] { return approximate_entropy(pi, 2, small); }, 0, 0.235301},
      {"e frequency", [&] { return frequency_monobit(e); }, 0, 0.953749},
      {"e block_frequency", [&] { return block_frequency(e, 128); }, 0, 0.211072},
      {"e cusum forward", [&] { return cumulative_sums(e); }, 0, 0.669886},
      {"e cusum reverse", [&] { return cumulative_sums(e); }, 1, 0.724265},
      {"e runs", [&] { return runs_test(e); }, 0, 0.561917},
      {"e longest_run", [&] { return longest_run_of_ones(e); }, 0, 0.718945},
      {"e rank", [&] { return binary_matrix_rank(e); }, 0, 0.306156},
      {"e[0:100000] rank", [&] { return binary_matrix_rank(e.slice(0, 100000)); }, 0, 0.532069},
      {"e dft", [&] { return spectral_dft(e); }, 0, 0.847187},
      {"e non_overlapping first template", [&] { return non_overlapping_template(e); }, 0, 0.078790},
      {"e overlapping_template", [&] { return overlapping_template(e); }, 0, 0.110434},
      {"e universal", [&] { return maurer_universal(e); }, 0, 0.282568},
      {"e approximate_entropy m=10", [&] { return approximate_entropy(e, 10); }, 0, 0.700073},
      {"e serial m=16 p1", [&] { return serial_test(e, 16); }, 0, 0.766182},
      {"e serial m=16 p2", [&] { return serial_test(e, 16); }, 1, 0.462921},
      {"e linear_complexity M=500", [&] { return linear_complexity(e, 500); }, 0, 0.826335},
      {"e linear_complexity M=1000", [&] { return linear_complexity(e, 1000); }, 0, 0.845406},
      {"e random_excursions x=+1", [&] { return random_excursions(e); }, 4, 0.786868},
      {"e random_excursions_variant x=-1", [&] { return random_excursions_variant(e); }, 8, 0.826009},
  };

  double worst = 0.0;
  std::string worst_label;
  bool ok = true;
  for (const auto& k : cases) {
    const auto r = k.run();
    const bool have = r.applicable && r.p_values.size() > k.index;
    const double diff = have ? std::abs(r.p_values[k.index] - k.expected) : 1.0;
    if (diff > worst) worst = diff, worst_label = k.label;
    if (diff > kKnownAnswerTol) {
      ok = false;
      info(fmt("%s: got %.6f expected %.6f", k.label.c_str(), have ? r.p_values[k.index] : -1.0, k.expected));
    }
  }
  BitStream zeros(std::vector<std::uint8_t>(kStreamBits / 8, 0), kStreamBits);
  const auto freq = frequency_monobit(zeros);
  const double zp = freq.p_values.empty() ? 1.0 : freq.p_values[0];
  const bool zeros_ok = freq.applicable && zp < kZerosMaxP && !freq.passed;
  verdict(5, ok && zeros_ok,
          fmt("%zu known answers, max |dp| = %.2e (%s) <= 1e-4; all-zeros 1 Mbit frequency p = %.3g (< 1e-6)",
              cases.size(), worst, worst_label.c_str(), zp));
}

BitStream long_run(std::size_t min_bits) {
  auto c = SimConfig::device_defaults();
  c.seed = 500;
  // A little more than needed at the model's 4.28 Mbit/s.
  c.n_cycles = static_cast<std::uint64_t>(static_cast<double>(min_bits) / 4.2e6 * c.clock_freq);
  PipelineOptions opt;
  const auto r = run_pipeline(c, opt);
  return r.bits;
}

void battery_proportions(const BitStream& bits) {
  const auto [lo500, hi500] = proportion_interval(kAlpha, 500);
  const auto [lo100, hi100] = proportion_interval(kAlpha, kStreams);
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_battery_on_streams(bits, kStreams, kStreamBits, kAlpha,
                                             std::max(1u, std::thread::hardware_concurrency()));
  const double runtime = seconds_since(t0);
  bool ok = bits.size() >= kStreams * kStreamBits;
  double lowest = 1.0;
  for (const auto& row : report.proportions) {
    if (row.indeterminate) {
      ok = false;
      info(fmt("%-26s indeterminate", row.test_name.c_str()));
      continue;
    }
    lowest = std::min(lowest, row.proportion);
    ok = ok && row.proportion >= kMinProportion;
    info(fmt("%-26s proportion %.4f  (%zu streams, %zu p-values)  all-p-value stream pass %.2f  "
             "pooled uniformity %.3f",
             row.test_name.c_str(), row.proportion, row.applicable_streams, row.p_value_count,
             row.stream_pass_fraction(), row.uniformity_p));
  }
  std::size_t low_slots = 0;
  for (const auto& row : report.per_p_value) low_slots += !row.indeterminate && !row.in_range;
  info(fmt("per-p-value rows below their band: %zu of %zu (expected by chance ~%.1f)", low_slots,
           report.per_p_value.size(), 0.0034 * report.per_p_value.size()));
  const bool band_ok = std::abs(lo500 - kBand500Lo) < kBandTol && hi500 == 1.0 &&
                       std::abs(lo100 - 0.96015) < kBandTol && hi100 == 1.0;
  verdict(6, ok && band_ok && runtime < kBatteryRuntimeLimit,
          fmt("%zu x 1 Mbit streams, lowest per-test proportion %.4f (>= 0.960); m=500 band [%.5f, %.1f], "
              "m=100 band [%.5f, %.1f]; battery runtime %.1f s",
              kStreams, lowest, lo500, hi500, lo100, hi100, runtime));
}

void bias() {
  auto c = SimConfig::device_defaults();
  c.seed = 77;
  c.n_cycles = static_cast<std::uint64_t>(static_cast<double>(kBiasBits) / 4.2e6 * c.clock_freq);
  const auto r = run_pipeline(c);
  const auto bits = r.bits.slice(0, std::min(kBiasBits, r.bits.size()));
  const double mean = static_cast<double>(bits.count_ones()) / static_cast<double>(bits.size());
  const double bound = 4.0 * std::sqrt(0.25 / static_cast<double>(kBiasBits));
  verdict(7, bits.size() == kBiasBits && std::abs(mean - 0.5) < bound,
          fmt("%zu bits, mean %.6f, |mean - 0.5| = %.2e (< %.2e)", bits.size(), mean, std::abs(mean - 0.5), bound));
}

void correlation(const BitStream& bits) {
  const auto m = byte_correlation(bits.slice(0, kCorrelationBits));
  const auto chi = uniformity_chi_square(m);
  verdict(8, chi.applicable && chi.p_value > kCorrelationLo && chi.p_value < kCorrelationHi,
          fmt("%zu bits, %llu byte pairs, chi-square %.1f (65535 dof), p = %.4f in (0.001, 0.999)",
              kCorrelationBits, static_cast<unsigned long long>(m.n_pairs), chi.statistic, chi.p_value));
}

void raw_export(const BitStream& bits) {
  const auto dir = fs::temp_directory_path() / "sdqrng_acceptance";
  fs::create_directories(dir);
  const auto sample = bits.slice(0, 1'000'000);
  const auto raw = dir / "bits.raw";
  const auto framed = dir / "bits.qbit";
  write_raw_bits(sample, raw);
  write_bits(sample, framed);
  std::ifstream a(raw, std::ios::binary), b(framed, std::ios::binary);
  const std::string ra((std::istreambuf_iterator<char>(a)), {});
  const std::string fb((std::istreambuf_iterator<char>(b)), {});
  const bool ok = ra.size() == sample.size() / 8 && fb.substr(kBitHeaderBytes) == ra &&
                  read_raw_bits(raw) == sample;
  fs::remove_all(dir);
  verdict(9, ok,
          fmt("headerless MSB-first export: %zu bytes, equals the bit file payload after its %zu-byte header; "
              "100 MHz saturation and the 21-test external battery are out of scope",
              ra.size(), kBitHeaderBytes));
}

}  // namespace

int main() {
  throughput();
  theory_peak();
  rate_curve();
  histogram();
  known_answers();
  bias();
  const auto t0 = std::chrono::steady_clock::now();
  const auto bits = long_run(std::max(kStreams * kStreamBits, kCorrelationBits));
  info(fmt("simulated %zu bits for criteria 6, 8, 9 in %.1f s", bits.size(), seconds_since(t0)));
  battery_proportions(bits);
  correlation(bits);
  raw_export(bits);
  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
