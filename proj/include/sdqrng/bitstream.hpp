#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdqrng/detector.hpp"

namespace sdqrng {

/// Packed bit sequence, MSB-first within each byte. Pad bits in the final
/// byte are always zero.
class BitStream {
 public:
  BitStream() = default;
  BitStream(std::vector<std::uint8_t> bytes, std::size_t n_bits);

  /// Parses '0'/'1' characters; anything else throws std::invalid_argument.
  static BitStream from_string(std::string_view text);

  std::size_t size() const noexcept { return n_bits_; }
  bool empty() const noexcept { return n_bits_ == 0; }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

  int operator[](std::size_t i) const noexcept {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1;
  }

  void push_back(bool bit) {
    if ((n_bits_ & 7) == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (n_bits_ & 7));
    ++n_bits_;
  }

  void reserve(std::size_t n_bits) { bytes_.reserve((n_bits + 7) / 8); }

  /// Bits [start, start + count).
  BitStream slice(std::size_t start, std::size_t count) const;

  std::uint64_t count_ones() const noexcept;
  std::string to_string() const;

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t n_bits_ = 0;
};

/// Even/odd gate rule: an event in an even-indexed gate yields 1, odd yields
/// 0, one bit per event in event order.
BitStream extract_bits(const EventStream& stream);

inline int parity_bit(const TimeTag& tag) noexcept { return (tag.cycle_index & 1) == 0 ? 1 : 0; }

/// Events per second of simulated time. Throws std::domain_error if the
/// stream covers zero gates.
double bit_rate(const EventStream& stream);

// QRNGBIT1 layout: char[8] "QRNGBIT1" | u64 n_bits (little-endian) | payload.
// Skipping the 16-byte header leaves a raw MSB-first byte stream.
inline constexpr char kBitMagic[8] = {'Q', 'R', 'N', 'G', 'B', 'I', 'T', '1'};
inline constexpr std::size_t kBitHeaderBytes = 16;

void write_bits(const BitStream& bits, std::ostream& out);
void write_bits(const BitStream& bits, const std::filesystem::path& path);
BitStream read_bits(std::istream& in);
BitStream read_bits(const std::filesystem::path& path);

/// Headerless payload, for DIEHARD-style tools that read raw binary.
void write_raw_bits(const BitStream& bits, const std::filesystem::path& path);
/// Reads `n_bits` from a headerless file; 0 means every bit in the file.
BitStream read_raw_bits(const std::filesystem::path& path, std::size_t n_bits = 0);

/// One '0'/'1' character per bit, no separators.
void write_ascii_bits(const BitStream& bits, std::ostream& out);

/// Detects QRNGBIT1 by magic, otherwise treats the file as raw bytes.
BitStream read_any_bits(const std::filesystem::path& path, std::size_t raw_n_bits = 0);

}  // namespace sdqrng
