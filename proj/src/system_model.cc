#include "edgefl/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgefl/error.hpp"

namespace edgefl {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kDomain, what);
}

}  // namespace

void DeviceProfile::validate() const {
  const std::string tag = "device " + std::to_string(id) + ": ";
  require(dataset_size >= 1, tag + "dataset_size must be >= 1");
  require(cycles_per_sample > 0.0, tag + "cycles_per_sample must be > 0");
  require(mean_cpu_hz > 0.0, tag + "mean_cpu_hz must be > 0");
  require(cpu_std_hz >= 0.0, tag + "cpu_std_hz must be >= 0");
  require(model_bits > 0.0, tag + "model_bits must be > 0");
  require(p_max_w > 0.0, tag + "p_max_w must be > 0");
  require(capacitance > 0.0, tag + "capacitance must be > 0");
  require(distance_m > 0.0, tag + "distance_m must be > 0");
}

void ChannelParams::validate(std::size_t num_devices) const {
  require(bandwidth_hz > 0.0, "channel: bandwidth_hz must be > 0");
  require(noise_power_w > 0.0, "channel: noise_power_w must be > 0");
  require(num_subchannels >= 1 && num_subchannels <= num_devices,
          "channel: need 1 <= num_subchannels <= num_devices");
}

void ObjectiveWeights::validate() const {
  if (lambda_t < 0.0 || lambda_e < 0.0 || std::fabs(lambda_t + lambda_e - 1.0) > 1e-12) {
    throw Error(ErrorCode::kWeight, "objective: lambda_t and lambda_e must be non-negative and sum to 1");
  }
  require(t_max_s > 0.0, "objective: t_max_s must be > 0");
  require(e_max_j > 0.0, "objective: e_max_j must be > 0");
}

double noise_power_w(double dbm_per_mhz, double bandwidth_hz) {
  return std::pow(10.0, (dbm_per_mhz - 30.0) / 10.0) * (bandwidth_hz / 1e6);
}

double pathloss_gain(double distance_m, const PathLoss& model) {
  require(distance_m > 0.0, "pathloss_gain: distance must be positive");
  const double loss_db = model.offset_db + model.slope_db * std::log10(distance_m * 1e-3);
  return std::pow(10.0, -loss_db / 10.0);
}

RoundState sample_round_state(std::span<const DeviceProfile> profiles, const PathLoss& pathloss,
                              Rng& rng, std::uint64_t round_index, double cpu_floor_hz) {
  RoundState state;
  state.round_index = round_index;
  state.gain_linear.reserve(profiles.size());
  state.cpu_hz.reserve(profiles.size());
  // |g|^2 of a unit-power Rayleigh envelope is Exp(1).
  std::exponential_distribution<double> fading(1.0);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  for (const DeviceProfile& p : profiles) {
    state.gain_linear.push_back(pathloss_gain(p.distance_m, pathloss) * fading(rng));
    const double f = p.mean_cpu_hz + p.cpu_std_hz * unit_normal(rng);
    state.cpu_hz.push_back(std::max(f, cpu_floor_hz));
  }
  return state;
}

double compute_time(const DeviceProfile& profile, double cpu_hz) {
  require(cpu_hz > 0.0, "compute_time: cpu_hz must be positive");
  return profile.dataset_size * profile.cycles_per_sample / cpu_hz;
}

double compute_energy(const DeviceProfile& profile, double cpu_hz) {
  require(cpu_hz > 0.0, "compute_energy: cpu_hz must be positive");
  return profile.capacitance * profile.dataset_size * profile.cycles_per_sample * cpu_hz * cpu_hz;
}

double uplink_rate(const ChannelParams& params, double power_w, double gain_linear) {
  const double snr = power_w * gain_linear / params.noise_power_w;
  return params.bandwidth_hz * std::log1p(snr) / std::log(2.0);
}

CommCost comm_time_energy(const ChannelParams& params, const DeviceProfile& profile, double power_w,
                          double gain_linear) {
  const double rate = uplink_rate(params, power_w, gain_linear);
  if (!(rate > 0.0)) {
    throw Error(ErrorCode::kInfeasible, "comm_time_energy: zero uplink rate");
  }
  const double time = profile.model_bits / rate;
  return {time, power_w * time};
}

double omega_cost(const CostSample& cost, const ObjectiveWeights& weights) {
  weights.validate();
  return weights.lambda_t * cost.time_total_s / weights.t_max_s +
         weights.lambda_e * cost.energy_total_j / weights.e_max_j;
}

CostSample evaluate_cost(const DeviceProfile& profile, const ChannelParams& params, DeviceRound round,
                         double power_w, const ObjectiveWeights& weights) {
  CostSample c;
  c.time_cmp_s = compute_time(profile, round.cpu_hz);
  c.energy_cmp_j = compute_energy(profile, round.cpu_hz);
  const CommCost com = comm_time_energy(params, profile, power_w, round.gain_linear);
  c.time_com_s = com.time_s;
  c.energy_com_j = com.energy_j;
  c.time_total_s = c.time_cmp_s + c.time_com_s;
  c.energy_total_j = c.energy_cmp_j + c.energy_com_j;
  c.omega = omega_cost(c, weights);
  return c;
}

std::vector<DeviceProfile> place_devices(std::size_t count, double radius_m, double min_distance_m,
                                         const DeviceRanges& ranges, Rng& rng) {
  require(radius_m > min_distance_m && min_distance_m > 0.0, "place_devices: need 0 < min_distance < radius");
  require(ranges.dataset_size_min >= 1 && ranges.dataset_size_min <= ranges.dataset_size_max,
          "place_devices: bad dataset size range");
  require(ranges.mean_cpu_hz_min > 0.0 && ranges.mean_cpu_hz_min <= ranges.mean_cpu_hz_max,
          "place_devices: bad cpu range");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> samples(ranges.dataset_size_min, ranges.dataset_size_max);
  std::uniform_real_distribution<double> cpu(ranges.mean_cpu_hz_min, ranges.mean_cpu_hz_max);
  const double r2_min = min_distance_m * min_distance_m;
  const double r2_max = radius_m * radius_m;

  std::vector<DeviceProfile> devices;
  devices.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    DeviceProfile d;
    d.id = n;
    // area-uniform radius on the annulus; the angle does not affect the cost model
    d.distance_m = std::sqrt(r2_min + unit(rng) * (r2_max - r2_min));
    d.dataset_size = samples(rng);
    d.mean_cpu_hz = cpu(rng);
    d.cpu_std_hz = ranges.cpu_std_hz;
    d.cycles_per_sample = ranges.cycles_per_sample;
    d.model_bits = ranges.model_bits;
    d.p_max_w = ranges.p_max_w;
    d.capacitance = ranges.capacitance;
    d.validate();
    devices.push_back(d);
  }
  return devices;
}

}  // namespace edgefl
