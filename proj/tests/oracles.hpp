#pragma once

// Slow, independent reference computations used by the tests. Nothing here
// calls into the library's numerics or power-control code.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

// Plain bisection; requires a sign change on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations = 200) {
  double flo = f(lo);
  if ((flo > 0) == (f(hi) > 0)) throw std::invalid_argument("bisect: no sign change");
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// One device in one round, written straight from the system equations.
struct Link {
  double d_n = 80;           // samples
  double c_n = 1e6;          // cycles per sample
  double f_hz = 2e9;
  double zeta = 1e-28;
  double z_bits = 8e6;
  double w_hz = 1e6;
  double noise_w = 4e-19;
  double gain = 1e-12;
  double p_cap = 1.0;
  double lambda_t = 0.5, lambda_e = 0.5, t_max = 1.0, e_max = 1.2;

  double t_cmp() const { return d_n * c_n / f_hz; }
  double e_cmp() const { return zeta * d_n * c_n * f_hz * f_hz; }
  double rate(double p) const { return w_hz * std::log1p(p * gain / noise_w) / std::log(2.0); }
  double time(double p) const { return t_cmp() + z_bits / rate(p); }
  double energy(double p) const { return e_cmp() + p * z_bits / rate(p); }
  double omega(double p) const {
    return lambda_t / t_max * time(p) + lambda_e / e_max * energy(p);
  }

  // Feasible power interval from bisection on the two budget equalities.
  // Returns {lo, hi}; lo > hi means infeasible.
  std::pair<double, double> interval() const {
    if (t_cmp() >= t_max || e_cmp() >= e_max) return {1.0, 0.0};
    double hi_p = p_cap;
    // Latency: time(p) decreasing in p.
    double lo;
    if (time(p_cap) > t_max) return {1.0, 0.0};
    {
      double a = 1e-30;
      if (time(a) <= t_max) {
        lo = a;
      } else {
        lo = bisect([&](double p) { return time(p) - t_max; }, a, p_cap);
        while (time(lo) > t_max) lo = std::nextafter(lo, 2.0 * p_cap);
      }
    }
    // Energy: energy(p) increasing in p.
    if (energy(p_cap) > e_max) {
      const double floor_energy = e_cmp() + z_bits * std::log(2.0) * noise_w / (w_hz * gain);
      if (floor_energy >= e_max) return {1.0, 0.0};
      double e_hi = bisect([&](double p) { return energy(p) - e_max; }, 1e-30, p_cap);
      while (e_hi > 0 && energy(e_hi) > e_max) e_hi = std::nextafter(e_hi, 0.0);
      hi_p = e_hi;
    }
    return {lo, hi_p};
  }
};

// Minimum of omega over `points` log-spaced powers on [lo, hi].
inline double grid_min(const Link& link, double lo, double hi, std::size_t points) {
  double best = std::min(link.omega(lo), link.omega(hi));
  const double llo = std::log(lo), step = (std::log(hi) - llo) / static_cast<double>(points - 1);
  for (std::size_t i = 1; i + 1 < points; ++i) best = std::min(best, link.omega(std::exp(llo + step * i)));
  return best;
}

}  // namespace oracle
