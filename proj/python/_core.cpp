#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "sdqrng/analysis.hpp"
#include "sdqrng/battery.hpp"
#include "sdqrng/pipeline.hpp"
#include "sdqrng/rate_model.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

// Bits travel as uint8 arrays holding one 0/1 value per element.
py::array_t<std::uint8_t> to_numpy(const sdqrng::BitStream& bits) {
  py::array_t<std::uint8_t> out(static_cast<py::ssize_t>(bits.size()));
  auto* p = out.mutable_data();
  for (std::size_t i = 0; i < bits.size(); ++i) p[i] = static_cast<std::uint8_t>(bits[i]);
  return out;
}

sdqrng::BitStream from_numpy(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  const auto n = static_cast<std::size_t>(a.size());
  const auto* p = a.data();
  std::vector<std::uint8_t> bytes((n + 7) / 8, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 1) throw py::value_error("bit arrays may only contain 0 and 1");
    if (p[i]) bytes[i >> 3] |= static_cast<std::uint8_t>(0x80u >> (i & 7));
  }
  return sdqrng::BitStream(std::move(bytes), n);
}

py::dict curve_dict(const sdqrng::RateCurve& c) {
  std::vector<double> x, r;
  for (const auto& p : c.points) {
    x.push_back(p.mu_nu);
    r.push_back(p.rate);
  }
  return py::dict("mu_nu"_a = py::array(py::cast(x)), "rate"_a = py::array(py::cast(r)));
}

py::dict simulate(const sdqrng::SimConfig& config, bool keep_events) {
  sdqrng::PipelineOptions opt;
  opt.keep_events = keep_events;
  sdqrng::PipelineResult r;
  {
    py::gil_scoped_release release;
    r = sdqrng::run_pipeline(config, opt);
  }
  py::dict out("bits"_a = to_numpy(r.bits), "registered"_a = r.registered,
               "avalanches"_a = r.avalanches, "n_cycles"_a = config.n_cycles);
  if (keep_events) {
    py::array_t<std::uint64_t> cycles(static_cast<py::ssize_t>(r.events.tags.size()));
    py::array_t<double> offsets(static_cast<py::ssize_t>(r.events.tags.size()));
    for (std::size_t i = 0; i < r.events.tags.size(); ++i) {
      cycles.mutable_data()[i] = r.events.tags[i].cycle_index;
      offsets.mutable_data()[i] = r.events.tags[i].offset;
    }
    out["cycle_index"] = cycles;
    out["offset"] = offsets;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Self-differencing QRNG simulator and randomness test battery";

  py::class_<sdqrng::SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_static("device_defaults", &sdqrng::SimConfig::device_defaults)
      .def_readwrite("clock_freq", &sdqrng::SimConfig::clock_freq)
      .def_readwrite("mu", &sdqrng::SimConfig::mu)
      .def_readwrite("nu", &sdqrng::SimConfig::nu)
      .def_readwrite("dark_prob", &sdqrng::SimConfig::dark_prob)
      .def_readwrite("jitter_mean", &sdqrng::SimConfig::jitter_mean)
      .def_readwrite("jitter_sigma", &sdqrng::SimConfig::jitter_sigma)
      .def_readwrite("dead_time", &sdqrng::SimConfig::dead_time)
      .def_readwrite("afterpulse_prob", &sdqrng::SimConfig::afterpulse_prob)
      .def_readwrite("seed", &sdqrng::SimConfig::seed)
      .def_readwrite("n_cycles", &sdqrng::SimConfig::n_cycles)
      .def("validate", &sdqrng::SimConfig::validate)
      .def("__repr__", &sdqrng::describe);

  py::register_exception<std::domain_error>(m, "DomainError", PyExc_ValueError);

  m.def("gate_detection_prob", &sdqrng::gate_detection_prob, "mu"_a, "nu"_a, "dark_prob"_a);
  m.def("sd_rate", &sdqrng::sd_rate, "clock_freq"_a, "mu_nu"_a, "dark_prob"_a);
  m.def("dead_time_limited_rate", &sdqrng::dead_time_limited_rate, "rate"_a, "dead_time"_a);
  m.def(
      "sweep_rate",
      [](double f, double lo, double hi, std::size_t n, double dark, double dead) {
        const auto s = sdqrng::sweep_rate(f, lo, hi, n, dark, dead);
        return py::make_tuple(curve_dict(s.theory), curve_dict(s.dead_time_limited));
      },
      "clock_freq"_a, "mu_nu_min"_a, "mu_nu_max"_a, "n_points"_a, "dark_prob"_a, "dead_time"_a);
  m.def(
      "find_peak",
      [](const std::vector<double>& mu_nu, const std::vector<double>& rate) {
        if (mu_nu.size() != rate.size()) throw py::value_error("mu_nu and rate differ in length");
        sdqrng::RateCurve c;
        for (std::size_t i = 0; i < mu_nu.size(); ++i) c.points.push_back({mu_nu[i], rate[i]});
        return sdqrng::find_peak(c);
      },
      "mu_nu"_a, "rate"_a);

  m.def("simulate", &simulate, "config"_a, "keep_events"_a = false,
        "Run gates, self-differencing, dead time and extraction; returns a dict of arrays.");
  m.def(
      "parity_bits",
      [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& cycles) {
        py::array_t<std::uint8_t> out(cycles.size());
        for (py::ssize_t i = 0; i < cycles.size(); ++i) {
          out.mutable_data()[i] = static_cast<std::uint8_t>((cycles.data()[i] & 1) == 0);
        }
        return out;
      },
      "cycle_index"_a);

  m.def(
      "battery",
      [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& bits, double alpha) {
        const auto b = from_numpy(bits);
        std::vector<sdqrng::TestResult> results;
        {
          py::gil_scoped_release release;
          results = sdqrng::battery(b, alpha);
        }
        py::list out;
        for (const auto& r : results) {
          out.append(py::dict("test_name"_a = r.test_name, "p_values"_a = r.p_values,
                              "applicable"_a = r.applicable, "passed"_a = r.passed, "note"_a = r.note));
        }
        return out;
      },
      "bits"_a, "alpha"_a = 0.01);
  m.def(
      "frequency_monobit",
      [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& bits, bool enforce_size) {
        sdqrng::TestOptions o;
        o.enforce_size = enforce_size;
        const auto r = sdqrng::frequency_monobit(from_numpy(bits), o);
        return py::make_tuple(r.applicable, r.p_values);
      },
      "bits"_a, "enforce_size"_a = true);
  m.def("proportion_interval", &sdqrng::proportion_interval, "alpha"_a, "m"_a);
  m.def(
      "byte_correlation",
      [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& bits) {
        const auto mat = sdqrng::byte_correlation(from_numpy(bits));
        py::array_t<std::uint64_t> out({256, 256});
        std::memcpy(out.mutable_data(), mat.counts.data(), mat.counts.size() * sizeof(std::uint64_t));
        const auto chi = sdqrng::uniformity_chi_square(mat);
        return py::make_tuple(out, chi.applicable ? py::cast(chi.p_value) : py::none());
      },
      "bits"_a);

#ifdef SDQRNG_VERSION
  m.attr("__version__") = SDQRNG_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
