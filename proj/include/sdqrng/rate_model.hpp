#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

namespace sdqrng {

struct RatePoint {
  double mu_nu = 0.0;
  double rate = 0.0;  // Hz
};

struct RateCurve {
  std::vector<RatePoint> points;  // strictly increasing mu_nu
  double clock_freq = 0.0;
  double dark_prob = 0.0;
};

struct RateSweep {
  RateCurve theory;
  RateCurve dead_time_limited;
};

/// Self-differencing count rate f p (1 - p), where p is the per-gate
/// avalanche probability for a mean detected photon number mu_nu. Peaks at
/// f/4 when p = 1/2 and falls to zero as adjacent-gate cancellation takes
/// over at large mu_nu.
double sd_rate(double clock_freq, double mu_nu, double dark_prob);

/// Rate after a nonparalyzable dead time: R / (1 + R tau).
double dead_time_limited_rate(double rate, double dead_time);

/// Theory curve over a mu_nu grid (log-spaced when mu_nu_min > 0, linear
/// when it is 0) plus the same curve throttled by the tagger dead time.
/// Throws std::domain_error on an invalid range.
RateSweep sweep_rate(double clock_freq, double mu_nu_min, double mu_nu_max, std::size_t n_points,
                     double dark_prob, double dead_time);

/// (mu_nu, rate) of the maximal point; ties go to the smaller mu_nu.
std::pair<double, double> find_peak(const RateCurve& curve);

/// CSV: mu_nu,theory_rate_hz,dead_time_limited_rate_hz
void write_rate_csv(const RateSweep& sweep, std::ostream& out);

}  // namespace sdqrng
