#include "edgefl/power_control.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "edgefl/error.hpp"
#include "edgefl/numerics.hpp"

namespace edgefl::power {
namespace {

using numerics::kLn2;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEnergyRootRelTol = 1e-9;

// Noise-to-gain ratio N0/h, the power needed for unit SNR.
double unit_snr_power(const ChannelParams& channel, double gain_linear) {
  return channel.noise_power_w / gain_linear;
}

PowerDecision make_decision(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                            const ObjectiveWeights& weights, const FeasibleInterval& interval, double power_w,
                            PowerCase which) {
  PowerDecision d;
  d.interval = interval;
  d.case_taken = which;
  d.power_w = power_w;
  d.upsilon_star = upsilon_of_power(channel, round.gain_linear, power_w);
  d.cost = evaluate_cost(profile, channel, round, power_w, weights);
  return d;
}

PowerDecision infeasible_decision(const FeasibleInterval& interval) {
  PowerDecision d;
  d.interval = interval;
  d.case_taken = PowerCase::kInfeasible;
  d.upsilon_star = kInf;
  d.cost.omega = kInf;
  return d;
}

// d/dp of transmit_energy.
double transmit_energy_slope(const DeviceProfile& profile, const ChannelParams& channel, double gain_linear,
                             double power_w) {
  const double k = unit_snr_power(channel, gain_linear);
  const double x = power_w / k;
  const double l = std::log1p(x);
  const double scale = profile.model_bits * kLn2 / channel.bandwidth_hz;
  return scale * (l - x / (1.0 + x)) / (l * l);
}

}  // namespace

const char* to_string(PowerCase c) {
  switch (c) {
    case PowerCase::kLowerBoundary: return "lower";
    case PowerCase::kUpperBoundary: return "upper";
    case PowerCase::kInterior: return "interior";
    case PowerCase::kInfeasible: return "infeasible";
  }
  return "?";
}

double p_min_latency(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                     double t_max_s) {
  const double t_cmp = compute_time(profile, round.cpu_hz);
  if (t_cmp >= t_max_s) {
    throw Error(ErrorCode::kLatencyInfeasible, "p_min_latency: computation time " + std::to_string(t_cmp) +
                                                   " s already reaches the latency budget");
  }
  const double bits_per_hz = profile.model_bits / (channel.bandwidth_hz * (t_max_s - t_cmp));
  return unit_snr_power(channel, round.gain_linear) * std::expm1(bits_per_hz * kLn2);
}

double transmit_energy(const DeviceProfile& profile, const ChannelParams& channel, double gain_linear,
                       double power_w) {
  const double k = unit_snr_power(channel, gain_linear);
  const double scale = profile.model_bits * kLn2 / channel.bandwidth_hz;
  if (power_w <= 0.0) return scale * k;
  const double x = power_w / k;
  return scale * power_w / std::log1p(x);
}

double p_max_energy(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                    double e_max_j) {
  const double budget = e_max_j - compute_energy(profile, round.cpu_hz);
  if (budget <= 0.0) {
    throw Error(ErrorCode::kEnergyInfeasible, "p_max_energy: computation energy exhausts the energy budget");
  }
  const double k = unit_snr_power(channel, round.gain_linear);
  const double a = profile.model_bits / (channel.bandwidth_hz * budget);
  // beta = g(0+) / budget; a positive root needs g(0+) < budget.
  const double beta = a * k * kLn2;
  if (beta > 1.0) {
    throw Error(ErrorCode::kNoPositiveRoot,
                "p_max_energy: transmit energy at vanishing power already exceeds the budget");
  }
  if (beta == 1.0) return 1.0 / (a * kLn2) - k;

  // g(p) = budget  <=>  s*e^{-beta*s} = e^{-beta} with s = 1 + p/k, whose two
  // solutions are s = 1 (p = 0) and the one we want. Which Lambert-W branch
  // carries the positive root depends on beta, so try both and keep the one
  // that is positive and actually solves g(p) = budget.
  const double arg = -beta * std::exp(-beta);
  double best = -1.0;
  double best_residual = kInf;
  for (numerics::Branch branch : {numerics::Branch::kPrincipal, numerics::Branch::kSecondary}) {
    const double w = numerics::lambert_w(branch, arg);
    const double p = -w / (a * kLn2) - k;
    if (!(p > 0.0) || !std::isfinite(p)) continue;
    const double residual = std::fabs(transmit_energy(profile, channel, round.gain_linear, p) - budget) / budget;
    if (residual < best_residual) {
      best = p;
      best_residual = residual;
    }
  }
  // Close to beta = 1 the two roots merge and cancellation costs digits; a few
  // Newton steps on the monotone g recover them.
  for (int i = 0; i < 8 && best > 0.0 && best_residual > kEnergyRootRelTol; ++i) {
    const double g = transmit_energy(profile, channel, round.gain_linear, best);
    const double slope = transmit_energy_slope(profile, channel, round.gain_linear, best);
    if (!(slope > 0.0)) break;
    best = std::max(best - (g - budget) / slope, 0.5 * best);
    best_residual = std::fabs(transmit_energy(profile, channel, round.gain_linear, best) - budget) / budget;
  }
  if (!(best > 0.0) || best_residual > kEnergyRootRelTol) {
    throw Error(ErrorCode::kNoPositiveRoot, "p_max_energy: no positive root of the energy budget equation");
  }
#ifndef NDEBUG
  {
    const auto excess = [&](double p) { return transmit_energy(profile, channel, round.gain_linear, p) - budget; };
    const double lo = best * (1.0 - 1e-6);
    const double hi = best * (1.0 + 1e-6);
    const double check = numerics::bracketed_root(excess, lo, hi, best * 1e-12);
    assert(std::fabs(check - best) <= 1e-6 * best);
  }
#endif
  return best;
}

FeasibleInterval feasibility(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                             const ObjectiveWeights& weights) {
  FeasibleInterval iv;
  iv.p_cap_w = profile.p_max_w;
  iv.p_min_w = kInf;
  iv.p_max_energy_w = 0.0;
  try {
    iv.p_min_w = p_min_latency(profile, channel, round, weights.t_max_s);
  } catch (const Error&) {
    return iv;
  }
  try {
    iv.p_max_energy_w = p_max_energy(profile, channel, round, weights.e_max_j);
  } catch (const Error&) {
    return iv;
  }
  iv.feasible = std::isfinite(iv.p_min_w) && iv.p_min_w <= iv.upper_w();
  return iv;
}

double upsilon_of_power(const ChannelParams& channel, double gain_linear, double power_w) {
  const double x = power_w / unit_snr_power(channel, gain_linear);
  return kLn2 / (channel.bandwidth_hz * std::log1p(x));
}

double power_of_upsilon(const ChannelParams& channel, double gain_linear, double upsilon) {
  return unit_snr_power(channel, gain_linear) * std::expm1(kLn2 / (channel.bandwidth_hz * upsilon));
}

double phi(double upsilon, double bandwidth_hz) {
  if (!(upsilon > 0.0)) {
    throw Error(ErrorCode::kDomain, "phi: upsilon must be positive");
  }
  const double x = kLn2 / (bandwidth_hz * upsilon);
  return std::exp(x) * (1.0 - x);
}

double objective_in_upsilon(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                            const ObjectiveWeights& weights, double upsilon) {
  const double z = profile.model_bits;
  const double k = unit_snr_power(channel, round.gain_linear);
  const double snr = std::expm1(kLn2 / (channel.bandwidth_hz * upsilon));
  return weights.theta_t() * (z * upsilon + compute_time(profile, round.cpu_hz)) +
         weights.theta_e() * (k * snr * z * upsilon + compute_energy(profile, round.cpu_hz));
}

double solve_interior_upsilon(double gain_linear, const ChannelParams& channel,
                              const ObjectiveWeights& weights) {
  if (!(weights.lambda_e > 0.0)) {
    throw Error(ErrorCode::kDegenerateWeight, "solve_interior_upsilon: lambda_e must be positive");
  }
  const double c = weights.theta_t() * gain_linear / (weights.theta_e() * channel.noise_power_w);
  if (!(c > 0.0)) {
    throw Error(ErrorCode::kDomain, "solve_interior_upsilon: needs lambda_t > 0");
  }
  const double w = numerics::lambert_w(numerics::Branch::kPrincipal, (c - 1.0) * numerics::kInvE);
  return kLn2 / (channel.bandwidth_hz * (1.0 + w));
}

PowerDecision optimal_power(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                            const ObjectiveWeights& weights) {
  const FeasibleInterval iv = feasibility(profile, channel, round, weights);
  if (!iv.feasible) return infeasible_decision(iv);

  const double p_lo = iv.p_min_w;
  const double p_hi = iv.upper_w();
  const double c = weights.theta_e() > 0.0
                       ? weights.theta_t() * round.gain_linear / (weights.theta_e() * channel.noise_power_w)
                       : kInf;
  const double target = 1.0 - c;

  // Low power means long airtime, so p_lo maps to the largest upsilon.
  const double ups_longest = upsilon_of_power(channel, round.gain_linear, p_lo);
  const double ups_shortest = upsilon_of_power(channel, round.gain_linear, p_hi);

  if (phi(ups_longest, channel.bandwidth_hz) <= target) {
    return make_decision(profile, channel, round, weights, iv, p_lo, PowerCase::kLowerBoundary);
  }
  if (phi(ups_shortest, channel.bandwidth_hz) >= target) {
    return make_decision(profile, channel, round, weights, iv, p_hi, PowerCase::kUpperBoundary);
  }
  const double ups = solve_interior_upsilon(round.gain_linear, channel, weights);
  const double p = std::clamp(power_of_upsilon(channel, round.gain_linear, ups), p_lo, p_hi);
  PowerDecision d = make_decision(profile, channel, round, weights, iv, p, PowerCase::kInterior);
  d.upsilon_star = ups;
  return d;
}

PowerDecision max_feasible_power(const DeviceProfile& profile, const ChannelParams& channel,
                                 DeviceRound round, const ObjectiveWeights& weights) {
  const FeasibleInterval iv = feasibility(profile, channel, round, weights);
  if (!iv.feasible) return infeasible_decision(iv);
  return make_decision(profile, channel, round, weights, iv, iv.upper_w(), PowerCase::kUpperBoundary);
}

GridOptimum oracle_power_grid(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                              const ObjectiveWeights& weights, std::size_t grid_points) {
  if (grid_points < 2) {
    throw Error(ErrorCode::kDomain, "oracle_power_grid: need at least 2 grid points");
  }
  const FeasibleInterval iv = feasibility(profile, channel, round, weights);
  if (!iv.feasible) {
    throw Error(ErrorCode::kInfeasible, "oracle_power_grid: device infeasible this round");
  }
  const double p_lo = iv.p_min_w;
  const double p_hi = iv.upper_w();
  const double k = unit_snr_power(channel, round.gain_linear);
  const double fixed = weights.theta_t() * compute_time(profile, round.cpu_hz) +
                       weights.theta_e() * compute_energy(profile, round.cpu_hz);
  const double bits_ln2_per_hz = profile.model_bits * kLn2 / channel.bandwidth_hz;
  const double theta_t = weights.theta_t();
  const double theta_e = weights.theta_e();
  const auto omega_at = [&](double p) {
    const double airtime = bits_ln2_per_hz / std::log1p(p / k);
    return fixed + theta_t * airtime + theta_e * p * airtime;
  };

  GridOptimum best{p_lo, omega_at(p_lo)};
  const double log_lo = std::log(p_lo);
  const double log_span = std::log(p_hi) - log_lo;
  const double last = static_cast<double>(grid_points - 1);
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double p = (i + 1 == grid_points) ? p_hi : std::exp(log_lo + log_span * (static_cast<double>(i) / last));
    const double om = omega_at(p);
    if (om < best.omega) best = {p, om};
  }
  return best;
}

}  // namespace edgefl::power
