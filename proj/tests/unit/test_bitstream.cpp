#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "approx.hpp"
#include "sdqrng/bitstream.hpp"
#include "sdqrng/event_file.hpp"

using namespace sdqrng;
using sdqrng::testing::approx;
namespace fs = std::filesystem;

namespace {

EventStream in_cycles(std::initializer_list<std::uint64_t> cycles) {
  EventStream s;
  for (auto c : cycles) s.tags.push_back({c, 1e-10});
  s.n_cycles = s.tags.empty() ? 1 : s.tags.back().cycle_index + 1;
  return s;
}

BitStream random_bits(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BitStream b;
  for (std::size_t i = 0; i < n; ++i) b.push_back(rng() & 1);
  return b;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("sdqrng_unit_" + name);
}

}  // namespace

TEST_CASE("even/odd extraction") {
  CHECK(extract_bits(in_cycles({2, 5, 8})).to_string() == "101");
  CHECK(extract_bits(in_cycles({0, 1, 2, 3, 4, 5, 6, 7, 8, 9})).to_string() == "1010101010");
  CHECK(extract_bits(in_cycles({})).empty());
}

TEST_CASE("parity rule shifts with prepended cycles") {
  const auto s = in_cycles({0, 3, 4, 10, 11, 17});
  const auto base = extract_bits(s);
  for (std::uint64_t k : {1u, 2u, 7u}) {
    EventStream shifted = s;
    for (auto& t : shifted.tags) t.cycle_index += k;
    const auto b = extract_bits(shifted);
    REQUIRE(b.size() == base.size());
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i] == (base[i] ^ static_cast<int>(k & 1)));
  }
}

TEST_CASE("bit_rate") {
  EventStream s;
  s.config.clock_freq = 1.03e9;
  s.n_cycles = 1'030'000'000;
  CHECK(bit_rate(s) == 0.0);
  s.tags.resize(4'010'000);
  CHECK(bit_rate(s) == approx(4.01e6));
  s.n_cycles = 0;
  CHECK_THROWS_AS(bit_rate(s), std::domain_error);
}

TEST_CASE("BitStream packing") {
  auto b = BitStream::from_string("1011");
  REQUIRE(b.bytes().size() == 1);
  CHECK(b.bytes()[0] == 0xB0);
  CHECK(b.count_ones() == 3);
  CHECK(b.slice(1, 3).to_string() == "011");
  CHECK_THROWS_AS(BitStream::from_string("10x"), std::invalid_argument);
  CHECK(BitStream({0xFF}, 4).bytes()[0] == 0xF0);
  CHECK_THROWS_AS(BitStream({}, 1), std::invalid_argument);
}

TEST_CASE("bit file round trip") {
  for (std::size_t n : {0u, 1u, 10u, 8u, 4093u, 100000u}) {
    const auto b = random_bits(n, n + 1);
    std::stringstream ss;
    write_bits(b, ss);
    CHECK(ss.str().size() == kBitHeaderBytes + (n + 7) / 8);
    CHECK(read_bits(ss) == b);
  }
  const auto path = temp_file("rt.bit");
  const auto b = random_bits(12345, 9);
  write_bits(b, path);
  CHECK(read_bits(path) == b);
  CHECK(read_any_bits(path) == b);
  fs::remove(path);
}

TEST_CASE("bit file format errors") {
  const auto b = BitStream::from_string("1011010101");
  std::stringstream ss;
  write_bits(b, ss);
  const std::string good = ss.str();

  auto read_string = [](const std::string& s) {
    std::istringstream in(s);
    return read_bits(in);
  };
  std::string bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(read_string(bad), FormatError);
  CHECK_THROWS_AS(read_string(good.substr(0, good.size() - 1)), FormatError);
  CHECK_THROWS_AS(read_string(good.substr(0, 10)), FormatError);
  CHECK_THROWS_AS(read_string(good + "x"), FormatError);
  bad = good;
  bad.back() = static_cast<char>(bad.back() | 0x01);
  CHECK_THROWS_AS(read_string(bad), FormatError);
}

TEST_CASE("raw and ascii export") {
  const auto b = random_bits(1000, 4);
  const auto path = temp_file("rt.raw");
  write_raw_bits(b, path);
  CHECK(fs::file_size(path) == 125);
  CHECK(read_raw_bits(path) == b);
  CHECK(read_raw_bits(path, 999) == b.slice(0, 999));
  CHECK(read_any_bits(path, 1000) == b);
  CHECK_THROWS(read_raw_bits(path, 1001));
  fs::remove(path);

  std::ostringstream out;
  write_ascii_bits(BitStream::from_string("0110"), out);
  CHECK(out.str() == "0110");
}

TEST_CASE("event file round trip and validation") {
  SimConfig c = SimConfig::device_defaults();
  EventStream s;
  s.config = c;
  s.n_cycles = 1000;
  s.tags = {{0, 250e-12}, {7, 970.5e-12}, {999, 0.0}};
  std::stringstream ss;
  write_events(s, ss);
  CHECK(ss.str().size() == kEventHeaderBytes + 16 * 3);
  const auto back = read_events(ss);
  CHECK(back.n_cycles == 1000);
  CHECK(back.config.clock_freq == approx(1.03e9));
  REQUIRE(back.tags.size() == 3);
  CHECK(back.tags[1].cycle_index == 7);
  CHECK(back.tags[1].offset == approx(970e-12).epsilon(1e-9));
  CHECK(back.tags[1].offset < c.gate_period());

  const std::string good = ss.str();
  auto read_string = [](const std::string& str) {
    std::istringstream in(str);
    return read_events(in);
  };
  CHECK_THROWS_AS(read_string(good.substr(0, good.size() - 3)), FormatError);
  std::string bad = good;
  bad[3] = 'x';
  CHECK_THROWS_AS(read_string(bad), FormatError);

  EventStream unordered = s;
  std::swap(unordered.tags[0], unordered.tags[1]);
  std::stringstream u;
  write_events(unordered, u);
  CHECK_THROWS_AS(read_events(u), FormatError);

  EventStream empty;
  empty.n_cycles = 0;
  std::stringstream e;
  write_events(empty, e);
  CHECK(read_events(e).tags.empty());
}
