#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "sdqrng/nist_tests.hpp"

namespace sdqrng {

std::vector<std::uint32_t> aperiodic_templates(unsigned m) {
  if (m < 2 || m > 21) throw std::domain_error("template length must be in [2, 21]");
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < (1u << m); ++v) {
    bool aperiodic = true;
    for (unsigned shift = 1; shift < m && aperiodic; ++shift) {
      const std::uint32_t overlap_mask = (1u << (m - shift)) - 1;
      // Leading m-shift bits against trailing m-shift bits.
      if ((v >> shift) == (v & overlap_mask)) aperiodic = false;
    }
    if (aperiodic) out.push_back(v);
  }
  return out;
}

std::size_t gf2_rank(std::vector<std::uint64_t> rows, std::size_t cols) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    const std::uint64_t bit = std::uint64_t{1} << c;
    std::size_t pivot = rank;
    while (pivot < rows.size() && !(rows[pivot] & bit)) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != rank && (rows[r] & bit)) rows[r] ^= rows[rank];
    }
    ++rank;
  }
  return rank;
}

double gf2_rank_probability(std::size_t rank, std::size_t rows, std::size_t cols) {
  if (rank > std::min(rows, cols)) return 0.0;
  // 2^{r(M+Q-r) - MQ} prod_{i<r} (1-2^{i-Q})(1-2^{i-M}) / (1-2^{i-r})
  const double r = static_cast<double>(rank);
  const double m = static_cast<double>(rows);
  const double q = static_cast<double>(cols);
  double p = std::exp2(r * (m + q - r) - m * q);
  for (std::size_t i = 0; i < rank; ++i) {
    const double di = static_cast<double>(i);
    p *= (1.0 - std::exp2(di - q)) * (1.0 - std::exp2(di - m)) / (1.0 - std::exp2(di - r));
  }
  return p;
}

std::size_t berlekamp_massey(std::span<const std::uint8_t> bits) {
  const std::size_t n = bits.size();
  const std::size_t words = n / 64 + 2;
  // c and b hold connection polynomials (bit i = coefficient of x^i); window
  // holds s[N-i] at bit i so the discrepancy is parity(c & window).
  std::vector<std::uint64_t> c(words, 0), b(words, 0), t(words, 0), window(words, 0);
  c[0] = b[0] = 1;
  std::size_t length = 0;
  std::size_t last = 0;  // position of the last length change, plus one
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::size_t w = words - 1; w > 0; --w) window[w] = (window[w] << 1) | (window[w - 1] >> 63);
    window[0] = (window[0] << 1) | (bits[pos] & 1u);

    unsigned d = 0;
    const std::size_t used = length / 64 + 1;
    for (std::size_t w = 0; w < used; ++w) d ^= static_cast<unsigned>(std::popcount(c[w] & window[w]));
    if ((d & 1u) == 0) continue;

    t = c;
    // c ^= b << shift, shift = pos - (last - 1) = pos + 1 - last
    const std::size_t shift = pos + 1 - last;
    const std::size_t ws = shift / 64;
    const unsigned bs = shift % 64;
    for (std::size_t w = words; w-- > ws;) {
      std::uint64_t v = b[w - ws] << bs;
      if (bs && w - ws > 0) v |= b[w - ws - 1] >> (64 - bs);
      c[w] ^= v;
    }
    if (2 * length <= pos) {
      length = pos + 1 - length;
      last = pos + 1;
      b = t;
    }
  }
  return length;
}

}  // namespace sdqrng
