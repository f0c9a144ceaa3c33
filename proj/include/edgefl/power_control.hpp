#pragma once

// Per-device transmit power selection for a single round.
//
// The device minimizes theta_t * T_total + theta_e * E_total subject to its
// power cap, the energy budget and the latency budget. Substituting the
// per-bit airtime
//
//   upsilon(p) = 1 / (W * log2(1 + p*h/N0))
//
// turns the objective into a convex function of upsilon whose stationary
// point solves phi(upsilon) = 1 - c with c = theta_t*h / (theta_e*N0). Since
// phi is increasing, comparing phi at the two ends of the feasible interval
// against 1 - c decides between the two boundary solutions and the interior
// Lambert-W closed form.

#include <cstddef>

#include "edgefl/system_model.hpp"

namespace edgefl::power {

struct FeasibleInterval {
  double p_min_w = 0.0;         // latency budget lower bound
  double p_max_energy_w = 0.0;  // energy budget upper bound
  double p_cap_w = 0.0;         // hardware cap
  bool feasible = false;

  double upper_w() const { return p_cap_w < p_max_energy_w ? p_cap_w : p_max_energy_w; }
};

enum class PowerCase { kLowerBoundary, kUpperBoundary, kInterior, kInfeasible };

const char* to_string(PowerCase c);

struct PowerDecision {
  double upsilon_star = 0.0;  // s/bit
  double power_w = 0.0;
  CostSample cost;
  PowerCase case_taken = PowerCase::kInfeasible;
  FeasibleInterval interval;

  bool feasible() const { return case_taken != PowerCase::kInfeasible; }
};

// Smallest power meeting T_cmp + T_com <= t_max_s. Throws kLatencyInfeasible
// when the computation alone exhausts the budget.
double p_min_latency(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                     double t_max_s);

// Largest power meeting E_cmp + E_com <= e_max_j, i.e. the positive root of
// g(p) = E_max - E_cmp where g(p) = p * z / rate(p). Throws kEnergyInfeasible
// when the computation alone exhausts the budget and kNoPositiveRoot when
// g(0+) already exceeds the remaining budget.
double p_max_energy(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                    double e_max_j);

// Communication energy as a function of power: g(p) = p * z / rate(p).
// Continuous at p = 0 with g(0+) = z * ln2 * N0 / (W * h).
double transmit_energy(const DeviceProfile& profile, const ChannelParams& channel, double gain_linear,
                       double power_w);

FeasibleInterval feasibility(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                             const ObjectiveWeights& weights);

double upsilon_of_power(const ChannelParams& channel, double gain_linear, double power_w);
double power_of_upsilon(const ChannelParams& channel, double gain_linear, double upsilon);

double phi(double upsilon, double bandwidth_hz);

// Objective in the upsilon variable (constant terms included), so that
// objective_in_upsilon(upsilon_of_power(p)) equals theta_t*T + theta_e*E.
double objective_in_upsilon(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                            const ObjectiveWeights& weights, double upsilon);

// Unconstrained minimizer of the upsilon objective. Requires lambda_e > 0.
double solve_interior_upsilon(double gain_linear, const ChannelParams& channel,
                              const ObjectiveWeights& weights);

PowerDecision optimal_power(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                            const ObjectiveWeights& weights);

// Transmits at the top of the feasible interval without optimizing the
// trade-off. Used by policies that do not run power control.
PowerDecision max_feasible_power(const DeviceProfile& profile, const ChannelParams& channel,
                                 DeviceRound round, const ObjectiveWeights& weights);

struct GridOptimum {
  double power_w = 0.0;
  double omega = 0.0;
};

// Exhaustive search over `grid_points` log-spaced powers spanning the feasible
// interval (both endpoints included). Throws kInfeasible on infeasible input.
GridOptimum oracle_power_grid(const DeviceProfile& profile, const ChannelParams& channel, DeviceRound round,
                              const ObjectiveWeights& weights, std::size_t grid_points);

}  // namespace edgefl::power
