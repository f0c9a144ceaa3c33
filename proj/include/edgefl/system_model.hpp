#pragma once

// Wireless uplink and on-device computation cost model.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace edgefl {

using Rng = std::mt19937_64;

struct DeviceProfile {
  std::size_t id = 0;
  double distance_m = 0.0;
  int dataset_size = 1;            // D_n, samples
  double cycles_per_sample = 1e6;  // c_n
  double mean_cpu_hz = 2e9;
  double cpu_std_hz = 0.2e9;
  double model_bits = 8e6;  // z_n
  double p_max_w = 1.0;
  double capacitance = 1e-28;  // zeta

  void validate() const;
};

struct PathLoss {
  double offset_db = 128.1;
  double slope_db = 37.6;  // per decade of distance in km
};

struct ChannelParams {
  double bandwidth_hz = 1e6;      // per sub-channel
  double noise_power_w = 0.0;     // over bandwidth_hz
  std::size_t num_subchannels = 1;
  PathLoss pathloss;

  void validate(std::size_t num_devices) const;
};

// Noise power in watts over `bandwidth_hz`, given a level quoted in dBm per MHz.
double noise_power_w(double dbm_per_mhz, double bandwidth_hz);

// Channel gain and CPU frequency of every device for one round.
struct RoundState {
  std::uint64_t round_index = 0;
  std::vector<double> gain_linear;
  std::vector<double> cpu_hz;
};

// One device's slice of a RoundState.
struct DeviceRound {
  double gain_linear = 0.0;
  double cpu_hz = 0.0;
};

inline DeviceRound slice(const RoundState& state, std::size_t device) {
  return {state.gain_linear.at(device), state.cpu_hz.at(device)};
}

struct ObjectiveWeights {
  double lambda_t = 0.5;
  double lambda_e = 0.5;
  double t_max_s = 1.0;
  double e_max_j = 1.2;

  double theta_t() const { return lambda_t / t_max_s; }
  double theta_e() const { return lambda_e / e_max_j; }
  void validate() const;
};

struct CostSample {
  double time_cmp_s = 0.0;
  double time_com_s = 0.0;
  double time_total_s = 0.0;
  double energy_cmp_j = 0.0;
  double energy_com_j = 0.0;
  double energy_total_j = 0.0;
  double omega = 0.0;
};

double pathloss_gain(double distance_m, const PathLoss& model = {});

RoundState sample_round_state(std::span<const DeviceProfile> profiles, const PathLoss& pathloss,
                              Rng& rng, std::uint64_t round_index, double cpu_floor_hz = 1e8);

double compute_time(const DeviceProfile& profile, double cpu_hz);
double compute_energy(const DeviceProfile& profile, double cpu_hz);
double uplink_rate(const ChannelParams& params, double power_w, double gain_linear);

struct CommCost {
  double time_s = 0.0;
  double energy_j = 0.0;
};
CommCost comm_time_energy(const ChannelParams& params, const DeviceProfile& profile, double power_w,
                          double gain_linear);

// Weighted normalized latency/energy cost. Reads time_total_s and energy_total_j.
double omega_cost(const CostSample& cost, const ObjectiveWeights& weights);

// Full cost breakdown for a device transmitting at `power_w` in the given round.
CostSample evaluate_cost(const DeviceProfile& profile, const ChannelParams& params, DeviceRound round,
                         double power_w, const ObjectiveWeights& weights);

struct DeviceRanges {
  int dataset_size_min = 70;
  int dataset_size_max = 100;
  double mean_cpu_hz_min = 1e9;
  double mean_cpu_hz_max = 3e9;
  double cpu_std_hz = 0.2e9;
  double cycles_per_sample = 1e6;
  double model_bits = 8e6;
  double p_max_w = 1.0;
  double capacitance = 1e-28;
};

// Devices placed uniformly over an annulus [min_distance_m, radius_m] around the
// server, with per-device D_n and mean CPU frequency drawn uniformly from `ranges`.
std::vector<DeviceProfile> place_devices(std::size_t count, double radius_m, double min_distance_m,
                                         const DeviceRanges& ranges, Rng& rng);

}  // namespace edgefl
