#include "sdqrng/special_functions.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace sdqrng {

double erfc(double x) {
  if (std::isnan(x)) throw std::domain_error("erfc: NaN argument");
  return std::erfc(x);
}

double igamc(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::domain_error("igamc: a must be positive");
  if (!(x >= 0.0)) throw std::domain_error("igamc: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(a, x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace sdqrng
