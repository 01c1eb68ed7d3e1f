#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "sdqrng/detector.hpp"

namespace sdqrng {

/// Malformed or truncated input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// QRNGEVT1 layout, all integers little-endian:
//   char[8] "QRNGEVT1" | u64 clock_freq_hz | u64 n_cycles | u64 record_count
//   record_count x (u64 cycle_index, u64 offset_ps)
inline constexpr char kEventMagic[8] = {'Q', 'R', 'N', 'G', 'E', 'V', 'T', '1'};
inline constexpr std::size_t kEventHeaderBytes = 32;

/// Incremental writer; the header is patched with the final record count on
/// finish().
class EventWriter {
 public:
  EventWriter(std::ostream& out, double clock_freq, std::uint64_t n_cycles);
  void write(const TimeTag& tag);
  void finish();
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::ostream& out_;
  std::uint64_t clock_hz_;
  std::uint64_t n_cycles_;
  std::uint64_t count_ = 0;
};

void write_events(const EventStream& stream, std::ostream& out);
void write_events(const EventStream& stream, const std::filesystem::path& path);

/// Offsets come back quantized to whole picoseconds. The returned config only
/// carries clock_freq and n_cycles; other fields keep their defaults.
EventStream read_events(std::istream& in);
EventStream read_events(const std::filesystem::path& path);

}  // namespace sdqrng
