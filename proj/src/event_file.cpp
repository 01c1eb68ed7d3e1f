#include "sdqrng/event_file.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "sdqrng/le_io.hpp"

namespace sdqrng {

namespace {

void write_header(std::ostream& out, std::uint64_t clock_hz, std::uint64_t n_cycles,
                  std::uint64_t count) {
  out.write(kEventMagic, sizeof kEventMagic);
  detail::put_u64(out, clock_hz);
  detail::put_u64(out, n_cycles);
  detail::put_u64(out, count);
}

}  // namespace

EventWriter::EventWriter(std::ostream& out, double clock_freq, std::uint64_t n_cycles)
    : out_(out), clock_hz_(static_cast<std::uint64_t>(std::llround(clock_freq))),
      n_cycles_(n_cycles) {
  write_header(out_, clock_hz_, n_cycles_, 0);
}

void EventWriter::write(const TimeTag& tag) {
  detail::put_u64(out_, tag.cycle_index);
  detail::put_u64(out_, static_cast<std::uint64_t>(std::floor(tag.offset * 1e12)));
  ++count_;
}

void EventWriter::finish() {
  const auto end = out_.tellp();
  out_.seekp(0);
  write_header(out_, clock_hz_, n_cycles_, count_);
  out_.seekp(end);
  out_.flush();
  if (!out_) throw std::runtime_error("failed writing event stream");
}

void write_events(const EventStream& stream, std::ostream& out) {
  EventWriter w(out, stream.config.clock_freq, stream.n_cycles);
  for (const auto& t : stream.tags) w.write(t);
  w.finish();
}

void write_events(const EventStream& stream, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_events(stream, out);
}

EventStream read_events(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kEventMagic, sizeof magic) != 0) {
    throw FormatError("not a QRNGEVT1 event file (bad magic)");
  }
  std::uint64_t clock_hz = 0;
  std::uint64_t n_cycles = 0;
  std::uint64_t count = 0;
  if (!detail::get_u64(in, clock_hz) || !detail::get_u64(in, n_cycles) ||
      !detail::get_u64(in, count)) {
    throw FormatError("truncated event file header");
  }
  if (clock_hz == 0) throw FormatError("event file declares zero clock frequency");

  EventStream s;
  s.config.clock_freq = static_cast<double>(clock_hz);
  s.config.n_cycles = n_cycles;
  s.n_cycles = n_cycles;
  const double period_ps = 1e12 / s.config.clock_freq;
  s.tags.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 26)));
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t cycle = 0;
    std::uint64_t offset_ps = 0;
    if (!detail::get_u64(in, cycle) || !detail::get_u64(in, offset_ps)) {
      throw FormatError("truncated event file payload");
    }
    if (cycle >= n_cycles) throw FormatError("event cycle_index beyond n_cycles");
    if (!s.tags.empty() && cycle <= s.tags.back().cycle_index) {
      throw FormatError("event cycle_index not strictly increasing");
    }
    if (static_cast<double>(offset_ps) >= period_ps) {
      throw FormatError("event offset outside its gate");
    }
    s.tags.push_back({cycle, static_cast<double>(offset_ps) * 1e-12});
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after event records");
  }
  return s;
}

EventStream read_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_events(in);
}

}  // namespace sdqrng
