#pragma once

// Binary expansions of mathematical constants, for known-answer tests.

#include <mpfr.h>

#include <cstddef>
#include <string>

#include "sdqrng/bitstream.hpp"

namespace sdqrng::testing {

enum class Constant { e, pi };

/// The first `n_bits` binary digits of the constant, integer part included
/// (e = 10.1011..., pi = 11.0010...).
inline BitStream constant_bits(Constant which, std::size_t n_bits) {
  mpfr_t x;
  mpfr_init2(x, static_cast<mpfr_prec_t>(n_bits + 64));
  if (which == Constant::e) {
    mpfr_set_ui(x, 1, MPFR_RNDN);
    mpfr_exp(x, x, MPFR_RNDN);
  } else {
    mpfr_const_pi(x, MPFR_RNDN);
  }
  mpfr_exp_t exponent = 0;
  char* digits = mpfr_get_str(nullptr, &exponent, 2, n_bits, x, MPFR_RNDZ);
  std::string s(digits);
  mpfr_free_str(digits);
  mpfr_clear(x);
  return BitStream::from_string(s);
}

}  // namespace sdqrng::testing
