#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sdqrng/analysis.hpp"
#include "sdqrng/battery.hpp"
#include "sdqrng/bitstream.hpp"
#include "sdqrng/event_file.hpp"
#include "sdqrng/pipeline.hpp"
#include "sdqrng/rate_model.hpp"

#ifndef SDQRNG_VERSION
#define SDQRNG_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

json config_json(const sdqrng::SimConfig& c) {
  return {{"clock_freq_hz", c.clock_freq},
          {"mu", c.mu},
          {"nu", c.nu},
          {"dark_prob", c.dark_prob},
          {"jitter_mean_s", c.jitter_mean},
          {"jitter_sigma_s", c.jitter_sigma},
          {"dead_time_s", c.dead_time},
          {"afterpulse_prob", c.afterpulse_prob},
          {"seed", c.seed},
          {"n_cycles", c.n_cycles},
          {"dc_bias_volts", c.dc_bias_volts},
          {"gate_amplitude_volts", c.gate_amplitude_volts}};
}

// Tracks the files a command creates so they can be hashed into the manifest
// on success or removed on failure.
class Run {
 public:
  Run(std::string command, std::vector<std::string> argv)
      : command_(std::move(command)), argv_(std::move(argv)), started_(utc_now()) {}

  fs::path output(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    outputs_.push_back(p);
    return p;
  }
  void input(const fs::path& p) { inputs_.push_back(p); }
  json& extra() { return extra_; }

  void commit(const fs::path& manifest_path) {
    json m;
    m["tool"] = "qrng";
    m["version"] = SDQRNG_VERSION;
    m["command"] = command_;
    m["argv"] = argv_;
    m["started_utc"] = started_;
    m["finished_utc"] = utc_now();
    for (const auto& [k, v] : extra_.items()) m[k] = v;
    auto describe = [](const fs::path& p) {
      return json{{"path", p.string()}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}};
    };
    m["inputs"] = json::array();
    for (const auto& p : inputs_) m["inputs"].push_back(describe(p));
    m["outputs"] = json::array();
    for (const auto& p : outputs_) m["outputs"].push_back(describe(p));
    output(manifest_path);
    std::ofstream out(manifest_path);
    out << m.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + manifest_path.string());
    committed_ = true;
  }

  ~Run() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : outputs_) fs::remove(p, ec);
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::string started_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
  json extra_ = json::object();
  bool committed_ = false;
};

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

struct SimFlags {
  double clock_hz = 1.03e9;
  double mu = 0.3;
  double nu = 0.1;
  double dark_hz = 1.0e4;
  double jitter_ps = 27.0;
  double jitter_mean_ps = 250.0;
  double dead_time_ns = 200.0;
  double afterpulse = 0.0;
  std::optional<double> seconds;
  std::optional<std::uint64_t> cycles;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* app, bool duration_required) {
    app->add_option("--clock-hz", clock_hz, "Gate clock frequency")->capture_default_str();
    app->add_option("--mu", mu, "Mean photons per gate")->capture_default_str();
    app->add_option("--nu", nu, "Detection efficiency")->capture_default_str();
    app->add_option("--dark-hz", dark_hz, "Dark count rate")->capture_default_str();
    app->add_option("--jitter-ps", jitter_ps, "Avalanche time spread (sigma)")->capture_default_str();
    app->add_option("--jitter-mean-ps", jitter_mean_ps, "Mean avalanche offset in the gate")
        ->capture_default_str();
    app->add_option("--dead-time-ns", dead_time_ns, "Tagger dead time")->capture_default_str();
    app->add_option("--afterpulse", afterpulse, "Afterpulse probability")->capture_default_str();
    auto* s = app->add_option("--seconds", seconds, "Simulated wall time");
    auto* c = app->add_option("--cycles", cycles, "Number of gates");
    s->excludes(c);
    if (duration_required) {
      app->callback([s, c] {
        if (s->count() == 0 && c->count() == 0) throw CLI::RequiredError("--seconds or --cycles");
      });
    }
    app->add_option("--seed", seed, "Simulation seed (falls back to QRNG_SEED)");
  }

  sdqrng::SimConfig config() const {
    sdqrng::SimConfig c;
    c.clock_freq = clock_hz;
    c.mu = mu;
    c.nu = nu;
    c.dark_prob = sdqrng::dark_prob_from_rate(dark_hz, clock_hz);
    c.jitter_sigma = jitter_ps * 1e-12;
    c.jitter_mean = jitter_mean_ps * 1e-12;
    c.dead_time = dead_time_ns * 1e-9;
    c.afterpulse_prob = afterpulse;
    if (seed) {
      c.seed = *seed;
    } else if (const char* env = std::getenv("QRNG_SEED")) {
      try {
        std::size_t used = 0;
        c.seed = std::stoull(env, &used, 0);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw CLI::ValidationError("QRNG_SEED", std::string("not an unsigned integer: ") + env);
      }
    }
    c.n_cycles = cycles ? *cycles : (seconds ? sdqrng::cycles_for_duration(*seconds, clock_hz) : 0);
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("simulation", e.what());
    }
    return c;
  }
};

void write_battery_files(Run& run, const sdqrng::BatteryReport& report, const fs::path& dir) {
  auto results = open_out(run.output(dir / "results.csv"));
  sdqrng::write_results_csv(report, results);
  if (report.per_stream.size() >= 2) {
    auto summary = open_out(run.output(dir / "summary.csv"));
    sdqrng::write_summary_csv(report, summary);
    auto per_p = open_out(run.output(dir / "summary_pvalues.csv"));
    sdqrng::write_p_value_summary_csv(report, per_p);
  }
}

// Runs the battery on consecutive substreams; with a single stream only the
// per-stream results exist.
sdqrng::BatteryReport battery_report(const sdqrng::BitStream& bits, std::size_t streams,
                                     std::size_t stream_bits, double alpha, unsigned jobs,
                                     const sdqrng::BatteryParams& params) {
  if (streams >= 2) {
    return sdqrng::run_battery_on_streams(bits, streams, stream_bits, alpha, jobs, params);
  }
  sdqrng::BatteryReport r;
  r.alpha = alpha;
  r.per_stream.push_back({0, sdqrng::battery(bits.slice(0, stream_bits), alpha, params)});
  return r;
}

void print_summary(const sdqrng::BatteryReport& report) {
  std::cout << "streams: " << report.per_stream.size() << "\n";
  if (report.per_stream.size() < 2) {
    for (const auto& r : report.per_stream.front().results) {
      std::cout << "  " << std::left << std::setw(28) << r.test_name
                << (r.applicable ? (r.passed ? "pass" : "FAIL") : "n/a") << '\n';
    }
    return;
  }
  for (const auto& row : report.proportions) {
    std::cout << "  " << std::left << std::setw(28) << row.test_name;
    if (row.indeterminate) {
      std::cout << "indeterminate\n";
      continue;
    }
    std::cout << std::fixed << std::setprecision(4) << row.proportion << "  ["
              << row.confidence_lo << ", " << row.confidence_hi << "]  "
              << (row.in_range ? "ok" : "LOW") << '\n';
  }
}

struct BatteryFlags {
  std::optional<std::size_t> streams;
  std::size_t stream_bits = 1'000'000;
  double alpha = 0.01;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool exact_overlapping = false;

  void add_to(CLI::App* app) {
    app->add_option("--streams", streams, "Number of substreams (default: as many as fit)");
    app->add_option("--stream-bits", stream_bits, "Bits per substream")->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--alpha", alpha, "Significance level")->capture_default_str()
        ->check(CLI::Range(1e-9, 0.5));
    app->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_flag("--exact-overlapping", exact_overlapping,
                  "Use exact class probabilities in the overlapping-template test");
  }

  sdqrng::BatteryParams params() const {
    sdqrng::BatteryParams p;
    if (exact_overlapping) p.overlapping_model = sdqrng::OverlappingModel::exact_table;
    return p;
  }

  // Stream count for `n_bits`, or nullopt when not even one stream fits.
  std::optional<std::size_t> count(std::size_t n_bits) const {
    const std::size_t fit = n_bits / stream_bits;
    if (streams && *streams > fit) {
      throw std::runtime_error("input holds " + std::to_string(n_bits) + " bits, fewer than " +
                               std::to_string(*streams) + " x " + std::to_string(stream_bits));
    }
    const std::size_t n = streams ? *streams : fit;
    if (n == 0) return std::nullopt;
    return n;
  }
};

int cmd_simulate(Run& run, const SimFlags& flags, const fs::path& out, const std::optional<fs::path>& bits_out) {
  const auto config = flags.config();
  auto file = open_out(run.output(out), true);
  sdqrng::EventWriter writer(file, config.clock_freq, config.n_cycles);
  sdqrng::PipelineOptions opt;
  opt.on_event = [&](const sdqrng::TimeTag& t) { writer.write(t); };
  const auto result = sdqrng::run_pipeline(config, opt);
  writer.finish();
  file.close();
  if (bits_out) sdqrng::write_bits(result.bits, run.output(*bits_out));

  run.extra()["config"] = config_json(config);
  run.extra()["seed"] = config.seed;
  run.extra()["counts"] = {{"avalanches", result.avalanches},
                           {"registered", result.registered},
                           {"kept", result.kept()}};
  run.commit(fs::path(out.string() + ".manifest.json"));
  std::cout << "gates " << config.n_cycles << ", registered " << result.registered << ", kept "
            << result.kept() << " (" << std::setprecision(6)
            << (config.n_cycles ? result.kept() * config.clock_freq / config.n_cycles : 0.0) / 1e6
            << " Mbit/s)\n";
  return kExitOk;
}

int cmd_extract(Run& run, const fs::path& in, const fs::path& out, const std::optional<fs::path>& raw_out,
                const std::optional<fs::path>& ascii_out) {
  run.input(in);
  const auto events = sdqrng::read_events(in);
  const auto bits = sdqrng::extract_bits(events);
  sdqrng::write_bits(bits, run.output(out));
  if (raw_out) sdqrng::write_raw_bits(bits, run.output(*raw_out));
  if (ascii_out) {
    auto a = open_out(run.output(*ascii_out));
    sdqrng::write_ascii_bits(bits, a);
  }
  run.extra()["n_bits"] = bits.size();
  run.commit(fs::path(out.string() + ".manifest.json"));
  std::cout << bits.size() << " bits, " << std::setprecision(6)
            << (events.n_cycles ? sdqrng::bit_rate(events) / 1e6 : 0.0) << " Mbit/s\n";
  return kExitOk;
}

int cmd_test(Run& run, const fs::path& in, std::size_t raw_n_bits, const BatteryFlags& flags,
             const fs::path& out_dir) {
  run.input(in);
  const auto bits = sdqrng::read_any_bits(in, raw_n_bits);
  BatteryFlags eff = flags;
  if (!flags.streams && bits.size() < flags.stream_bits) eff.stream_bits = bits.size();
  const auto streams = eff.count(bits.size());
  if (!streams) throw std::runtime_error("input has no bits to test");
  const auto report = battery_report(bits, *streams, eff.stream_bits, eff.alpha, eff.jobs, eff.params());
  write_battery_files(run, report, out_dir);
  run.extra()["battery"] = {{"streams", *streams},
                            {"stream_bits", eff.stream_bits},
                            {"alpha", eff.alpha},
                            {"overlapping_model", eff.exact_overlapping ? "exact_table" : "series"}};
  run.commit(out_dir / "manifest.json");
  print_summary(report);
  return kExitOk;
}

int cmd_sweep(Run& run, double clock_hz, double min, double max, std::size_t points, double dark_hz,
              double dead_time_ns, const fs::path& out) {
  const auto sweep = sdqrng::sweep_rate(clock_hz, min, max, points,
                                        sdqrng::dark_prob_from_rate(dark_hz, clock_hz), dead_time_ns * 1e-9);
  {
    auto f = open_out(run.output(out));
    sdqrng::write_rate_csv(sweep, f);
  }
  const auto [x, peak] = sdqrng::find_peak(sweep.theory);
  run.extra()["peak"] = {{"mu_nu", x}, {"theory_rate_hz", peak}};
  run.commit(fs::path(out.string() + ".manifest.json"));
  std::cout << "peak " << std::setprecision(6) << peak / 1e6 << " MHz at mu*nu = " << x << '\n';
  return kExitOk;
}

int cmd_report(Run& run, const SimFlags& sim, const std::optional<fs::path>& events_in,
               const BatteryFlags& flags, double bin_width_ps, std::uint64_t histogram_cycles,
               const fs::path& out_dir) {
  sdqrng::EventStream events;
  sdqrng::BitStream bits;
  fs::create_directories(out_dir);
  if (events_in) {
    run.input(*events_in);
    events = sdqrng::read_events(*events_in);
    bits = sdqrng::extract_bits(events);
    run.extra()["config_source"] = "event file header (clock and gate count only)";
  } else {
    const auto config = sim.config();
    sdqrng::PipelineOptions opt;
    opt.keep_events = true;
    auto result = sdqrng::run_pipeline(config, opt);
    events = std::move(result.events);
    bits = std::move(result.bits);
    sdqrng::write_events(events, run.output(out_dir / "events.qevt"));
    sdqrng::write_bits(bits, run.output(out_dir / "bits.qbit"));
    run.extra()["config_source"] = "simulated";
    run.extra()["seed"] = config.seed;
  }
  run.extra()["config"] = config_json(events.config);

  std::optional<sdqrng::BatteryReport> battery;
  const auto streams = flags.count(bits.size());
  if (streams && *streams >= 2) {
    battery = sdqrng::run_battery_on_streams(bits, *streams, flags.stream_bits, flags.alpha,
                                             flags.jobs, flags.params());
    write_battery_files(run, *battery, out_dir);
  }

  sdqrng::ReportOptions ro;
  ro.histogram_bin_width = bin_width_ps * 1e-12;
  ro.histogram_cycles = histogram_cycles;
  ro.stream_bits = flags.stream_bits;
  const auto report = sdqrng::run_report(events, bits, battery, ro);
  {
    auto f = open_out(run.output(out_dir / "report.txt"));
    f << sdqrng::report_text(report);
  }
  {
    auto f = open_out(run.output(out_dir / "report.kv"));
    f << sdqrng::report_key_values(report);
  }
  {
    auto f = open_out(run.output(out_dir / "histogram.csv"));
    sdqrng::write_histogram_csv(sdqrng::cycle_histogram(events, ro.histogram_bin_width, histogram_cycles), f);
  }
  if (bits.size() >= 16) {
    auto f = open_out(run.output(out_dir / "byte_correlation.csv"));
    sdqrng::write_matrix_csv(sdqrng::byte_correlation(bits), f);
  }
  run.commit(out_dir / "manifest.json");
  std::cout << sdqrng::report_text(report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-differencing gated-detector QRNG simulator and randomness test battery"};
  app.set_version_flag("--version", SDQRNG_VERSION);
  app.require_subcommand(1);

  SimFlags sim;
  fs::path sim_out;
  std::optional<fs::path> sim_bits;
  auto* simulate = app.add_subcommand("simulate", "Simulate detection events");
  sim.add_to(simulate, true);
  simulate->add_option("--out", sim_out, "Event file (QRNGEVT1)")->required();
  simulate->add_option("--bits-out", sim_bits, "Also write the extracted bits (QRNGBIT1)");

  fs::path ex_in, ex_out;
  std::optional<fs::path> ex_raw, ex_ascii;
  auto* extract = app.add_subcommand("extract", "Even/odd bit extraction from an event file");
  extract->add_option("--in", ex_in, "Event file")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", ex_out, "Bit file (QRNGBIT1)")->required();
  extract->add_option("--raw-out", ex_raw, "Headerless binary for external test tools");
  extract->add_option("--ascii-out", ex_ascii, "One '0'/'1' character per bit");

  fs::path test_in, test_dir;
  std::size_t test_n_bits = 0;
  BatteryFlags test_flags;
  auto* test = app.add_subcommand("test", "Run the statistical battery on a bit file");
  test->add_option("--in", test_in, "QRNGBIT1 file or headerless binary")->required()->check(CLI::ExistingFile);
  test->add_option("--n-bits", test_n_bits, "Bits to read from a headerless file (default: all)");
  test_flags.add_to(test);
  test->add_option("--out-dir", test_dir, "Directory for CSV reports")->required();

  double sw_clock = 1.03e9, sw_min = 1e-3, sw_max = 1e2, sw_dark = 1e4, sw_dead = 200.0;
  std::size_t sw_points = 200;
  fs::path sw_out;
  auto* sweep = app.add_subcommand("sweep-rate", "Self-differencing count rate versus mu*nu");
  sweep->add_option("--clock-hz", sw_clock)->capture_default_str();
  sweep->add_option("--min", sw_min, "Smallest mu*nu (0 selects a linear grid)")->capture_default_str();
  sweep->add_option("--max", sw_max, "Largest mu*nu")->capture_default_str();
  sweep->add_option("--points", sw_points)->capture_default_str();
  sweep->add_option("--dark-hz", sw_dark)->capture_default_str();
  sweep->add_option("--dead-time-ns", sw_dead)->capture_default_str();
  sweep->add_option("--out", sw_out, "CSV output")->required();

  SimFlags rep_sim;
  std::optional<fs::path> rep_events;
  BatteryFlags rep_flags;
  double rep_bin_ps = 1.0;
  std::uint64_t rep_cycles = 2;
  fs::path rep_dir;
  auto* report = app.add_subcommand("report", "Simulate (or load events) and write a report bundle");
  rep_sim.add_to(report, false);
  report->add_option("--events", rep_events, "Use an existing event file instead of simulating")
      ->check(CLI::ExistingFile);
  rep_flags.add_to(report);
  report->add_option("--bin-width-ps", rep_bin_ps, "Histogram bin width")->capture_default_str()
      ->check(CLI::PositiveNumber);
  report->add_option("--histogram-cycles", rep_cycles, "Gates shown in the histogram")
      ->capture_default_str()->check(CLI::PositiveNumber);
  report->add_option("--out-dir", rep_dir, "Bundle directory")->required();
  report->callback([&] {
    const bool duration = report->count("--seconds") + report->count("--cycles") > 0;
    if (rep_events && duration) throw CLI::ValidationError("--events", "cannot be combined with --seconds/--cycles");
    if (!rep_events && !duration) throw CLI::RequiredError("--events, --seconds or --cycles");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::vector<std::string> args(argv, argv + argc);
  auto* sub = app.get_subcommands().front();
  Run run(sub->get_name(), args);
  try {
    if (sub == simulate) return cmd_simulate(run, sim, sim_out, sim_bits);
    if (sub == extract) return cmd_extract(run, ex_in, ex_out, ex_raw, ex_ascii);
    if (sub == test) return cmd_test(run, test_in, test_n_bits, test_flags, test_dir);
    if (sub == sweep) return cmd_sweep(run, sw_clock, sw_min, sw_max, sw_points, sw_dark, sw_dead, sw_out);
    if (sub == report) return cmd_report(run, rep_sim, rep_events, rep_flags, rep_bin_ps, rep_cycles, rep_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "qrng " << sub->get_name() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "qrng " << sub->get_name() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qrng " << sub->get_name() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "qrng " << sub->get_name() << ": " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
