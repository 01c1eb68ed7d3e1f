#include "sdqrng/bitstream.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "sdqrng/event_file.hpp"
#include "sdqrng/le_io.hpp"

namespace sdqrng {

namespace {

void clear_padding(std::vector<std::uint8_t>& bytes, std::size_t n_bits) {
  if (n_bits & 7) bytes.back() &= static_cast<std::uint8_t>(0xFF00u >> (n_bits & 7));
}

}  // namespace

BitStream::BitStream(std::vector<std::uint8_t> bytes, std::size_t n_bits)
    : bytes_(std::move(bytes)), n_bits_(n_bits) {
  if (bytes_.size() < (n_bits_ + 7) / 8) {
    throw std::invalid_argument("BitStream: fewer bytes than n_bits requires");
  }
  bytes_.resize((n_bits_ + 7) / 8);
  clear_padding(bytes_, n_bits_);
}

BitStream BitStream::from_string(std::string_view text) {
  BitStream b;
  b.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("bit string may only hold '0' and '1'");
    b.push_back(c == '1');
  }
  return b;
}

BitStream BitStream::slice(std::size_t start, std::size_t count) const {
  if (start > n_bits_ || count > n_bits_ - start) {
    throw std::out_of_range("BitStream::slice beyond end of stream");
  }
  std::vector<std::uint8_t> out((count + 7) / 8);
  const std::size_t shift = start & 7;
  const std::size_t first = start >> 3;
  if (shift == 0) {
    std::memcpy(out.data(), bytes_.data() + first, out.size());
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const unsigned hi = bytes_[first + i];
      const unsigned lo = first + i + 1 < bytes_.size() ? bytes_[first + i + 1] : 0u;
      out[i] = static_cast<std::uint8_t>(((hi << shift) | (lo >> (8 - shift))) & 0xFF);
    }
  }
  return BitStream(std::move(out), count);
}

std::uint64_t BitStream::count_ones() const noexcept {
  std::uint64_t n = 0;
  for (auto byte : bytes_) n += static_cast<unsigned>(std::popcount(byte));
  return n;
}

std::string BitStream::to_string() const {
  std::string s(n_bits_, '0');
  for (std::size_t i = 0; i < n_bits_; ++i) s[i] = static_cast<char>('0' + (*this)[i]);
  return s;
}

BitStream extract_bits(const EventStream& stream) {
  BitStream bits;
  bits.reserve(stream.tags.size());
  for (const auto& tag : stream.tags) bits.push_back(parity_bit(tag));
  return bits;
}

double bit_rate(const EventStream& stream) {
  if (stream.n_cycles == 0) throw std::domain_error("bit_rate: stream covers zero cycles");
  return static_cast<double>(stream.tags.size()) * stream.config.clock_freq /
         static_cast<double>(stream.n_cycles);
}

void write_bits(const BitStream& bits, std::ostream& out) {
  out.write(kBitMagic, sizeof kBitMagic);
  detail::put_u64(out, bits.size());
  out.write(reinterpret_cast<const char*>(bits.bytes().data()),
            static_cast<std::streamsize>(bits.bytes().size()));
  if (!out) throw std::runtime_error("failed writing bit stream");
}

void write_bits(const BitStream& bits, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_bits(bits, out);
}

BitStream read_bits(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kBitMagic, sizeof magic) != 0) {
    throw FormatError("not a QRNGBIT1 bit file (bad magic)");
  }
  std::uint64_t n_bits = 0;
  if (!detail::get_u64(in, n_bits)) throw FormatError("truncated bit file header");
  const std::uint64_t n_bytes = (n_bits + 7) / 8;
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n_bytes));
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n_bytes))) {
    throw FormatError("truncated bit file payload");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after bit file payload");
  }
  if ((n_bits & 7) && (bytes.back() & (0xFFu >> (n_bits & 7)))) {
    throw FormatError("nonzero pad bits in final byte");
  }
  return BitStream(std::move(bytes), static_cast<std::size_t>(n_bits));
}

BitStream read_bits(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_bits(in);
}

void write_raw_bits(const BitStream& bits, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bits.bytes().data()),
            static_cast<std::streamsize>(bits.bytes().size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

BitStream read_raw_bits(const std::filesystem::path& path, std::size_t n_bits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (n_bits == 0) n_bits = bytes.size() * 8;
  if (bytes.size() * 8 < n_bits) {
    throw FormatError("raw bit file holds fewer than the requested " + std::to_string(n_bits) +
                      " bits");
  }
  return BitStream(std::move(bytes), n_bits);
}

void write_ascii_bits(const BitStream& bits, std::ostream& out) {
  std::string chunk;
  chunk.reserve(1 << 16);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    chunk.push_back(static_cast<char>('0' + bits[i]));
    if (chunk.size() == chunk.capacity()) {
      out << chunk;
      chunk.clear();
    }
  }
  out << chunk;
}

BitStream read_any_bits(const std::filesystem::path& path, std::size_t raw_n_bits) {
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8] = {};
    in.read(magic, sizeof magic);
    if (in.gcount() == sizeof magic && std::memcmp(magic, kBitMagic, sizeof magic) == 0) {
      in.seekg(0);
      return read_bits(in);
    }
  }
  return read_raw_bits(path, raw_n_bits);
}

}  // namespace sdqrng
