#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>

namespace sdqrng::detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 8);
}

inline bool get_u64(std::istream& in, std::uint64_t& v) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) return false;
  v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return true;
}

}  // namespace sdqrng::detail
