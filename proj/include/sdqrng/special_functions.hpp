#pragma once

namespace sdqrng {

/// Complementary error function.
double erfc(double x);

/// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
/// Throws std::domain_error unless a > 0 and x >= 0.
double igamc(double a, double x);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace sdqrng
