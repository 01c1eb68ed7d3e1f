#include "sdqrng/rate_model.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "sdqrng/detector.hpp"

namespace sdqrng {

double sd_rate(double clock_freq, double mu_nu, double dark_prob) {
  if (!(clock_freq > 0.0)) throw std::domain_error("sd_rate: clock_freq must be positive");
  const double p = gate_detection_prob(mu_nu, 1.0, dark_prob);
  return clock_freq * p * (1.0 - p);
}

double dead_time_limited_rate(double rate, double dead_time) {
  if (!(dead_time >= 0.0)) throw std::domain_error("dead_time must be >= 0");
  return rate / (1.0 + rate * dead_time);
}

RateSweep sweep_rate(double clock_freq, double mu_nu_min, double mu_nu_max, std::size_t n_points,
                     double dark_prob, double dead_time) {
  if (n_points == 0) throw std::domain_error("sweep_rate: need at least one point");
  if (!(mu_nu_min >= 0.0) || !std::isfinite(mu_nu_max)) {
    throw std::domain_error("sweep_rate: mu_nu bounds must be finite and >= 0");
  }
  if (n_points == 1 ? mu_nu_min != mu_nu_max : !(mu_nu_min < mu_nu_max)) {
    throw std::domain_error("sweep_rate: need mu_nu_min < mu_nu_max (or equal for one point)");
  }
  if (!(dead_time >= 0.0)) throw std::domain_error("sweep_rate: dead_time must be >= 0");

  RateSweep sweep;
  sweep.theory.clock_freq = sweep.dead_time_limited.clock_freq = clock_freq;
  sweep.theory.dark_prob = sweep.dead_time_limited.dark_prob = dark_prob;
  sweep.theory.points.reserve(n_points);
  sweep.dead_time_limited.points.reserve(n_points);

  const bool log_grid = mu_nu_min > 0.0;
  const double lo = log_grid ? std::log(mu_nu_min) : mu_nu_min;
  const double hi = log_grid ? std::log(mu_nu_max) : mu_nu_max;
  for (std::size_t i = 0; i < n_points; ++i) {
    double x = mu_nu_min;
    if (n_points > 1) {
      const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
      x = log_grid ? std::exp(t) : t;
    }
    if (i == 0) x = mu_nu_min;
    if (i + 1 == n_points) x = mu_nu_max;
    const double r = sd_rate(clock_freq, x, dark_prob);
    sweep.theory.points.push_back({x, r});
    sweep.dead_time_limited.points.push_back({x, dead_time_limited_rate(r, dead_time)});
  }
  return sweep;
}

std::pair<double, double> find_peak(const RateCurve& curve) {
  if (curve.points.empty()) throw std::domain_error("find_peak: empty curve");
  const RatePoint* best = &curve.points.front();
  for (const auto& pt : curve.points) {
    if (pt.rate > best->rate) best = &pt;
  }
  return {best->mu_nu, best->rate};
}

void write_rate_csv(const RateSweep& sweep, std::ostream& out) {
  const auto old_precision = out.precision(12);
  out << "mu_nu,theory_rate_hz,dead_time_limited_rate_hz\n";
  for (std::size_t i = 0; i < sweep.theory.points.size(); ++i) {
    out << sweep.theory.points[i].mu_nu << ',' << sweep.theory.points[i].rate << ','
        << sweep.dead_time_limited.points[i].rate << '\n';
  }
  out.precision(old_precision);
}

}  // namespace sdqrng
