#include <doctest.h>

#include <cmath>
#include <vector>

#include "edgefl/error.hpp"
#include "edgefl/system_model.hpp"

using namespace edgefl;

namespace {

DeviceProfile device(int d_n, double cycles = 1e6) {
  DeviceProfile p;
  p.dataset_size = d_n;
  p.cycles_per_sample = cycles;
  return p;
}

ChannelParams unit_snr_channel() {
  ChannelParams c;
  c.bandwidth_hz = 1e6;
  c.noise_power_w = 1e-3;
  return c;
}

}  // namespace

TEST_CASE("path loss") {
  CHECK(pathloss_gain(1000.0) == doctest::Approx(std::pow(10.0, -12.81)).epsilon(1e-12));
  CHECK(pathloss_gain(100.0) == doctest::Approx(std::pow(10.0, -9.05)).epsilon(1e-12));
  const double l500 = 128.1 + 37.6 * std::log10(0.5);
  CHECK(l500 == doctest::Approx(116.78).epsilon(1e-4));
  CHECK(pathloss_gain(500.0) == doctest::Approx(std::pow(10.0, -l500 / 10.0)).epsilon(1e-12));
}

TEST_CASE("noise power scales with bandwidth") {
  CHECK(noise_power_w(-154.0, 1e6) == doctest::Approx(std::pow(10.0, -18.4)).epsilon(1e-12));
  CHECK(noise_power_w(-154.0, 2e6) == doctest::Approx(2.0 * std::pow(10.0, -18.4)).epsilon(1e-12));
}

TEST_CASE("computation time and energy") {
  CHECK(compute_time(device(100), 2e9) == doctest::Approx(0.05));
  CHECK(compute_time(device(70), 1e9) == doctest::Approx(0.07));
  CHECK(compute_time(device(100), 1e8) == doctest::Approx(1.0));
  CHECK(compute_energy(device(100), 2e9) == doctest::Approx(0.04));
  CHECK(compute_energy(device(100), 1e9) == doctest::Approx(0.01));
  CHECK(compute_energy(device(90), 3e9) == doctest::Approx(4.0 * compute_energy(device(90), 1.5e9)));
}

TEST_CASE("uplink rate and communication cost") {
  const ChannelParams c = unit_snr_channel();
  CHECK(uplink_rate(c, 1e-3, 1.0) == doctest::Approx(1e6));
  CHECK(uplink_rate(c, 0.255, 1.0) == doctest::Approx(8e6));
  CHECK(uplink_rate(c, 0.0, 1.0) == 0.0);

  DeviceProfile p = device(80);
  p.model_bits = 8e6;
  const CommCost fast = comm_time_energy(c, p, 0.5, 255e-3 / 0.5);  // rate 8e6
  CHECK(fast.time_s == doctest::Approx(1.0));
  CHECK(fast.energy_j == doctest::Approx(0.5));
  const CommCost slow = comm_time_energy(c, p, 1e-3, 1.0);  // rate 1e6
  CHECK(slow.time_s == doctest::Approx(8.0));

  DeviceProfile big = p;
  big.model_bits = 16e6;
  const CommCost doubled = comm_time_energy(c, big, 0.5, 255e-3 / 0.5);
  CHECK(doubled.time_s == doctest::Approx(2.0 * fast.time_s));
  CHECK(doubled.energy_j == doctest::Approx(2.0 * fast.energy_j));
  CHECK_THROWS_AS(comm_time_energy(c, p, 0.0, 1.0), Error);
}

TEST_CASE("omega cost") {
  ObjectiveWeights w{1.0, 0.0, 1.0, 1.2};
  CostSample s;
  s.time_total_s = 1.0;
  s.energy_total_j = 0.7;
  CHECK(omega_cost(s, w) == doctest::Approx(1.0));
  w = {0.5, 0.5, 1.0, 1.2};
  s.energy_total_j = 1.2;
  CHECK(omega_cost(s, w) == doctest::Approx(1.0));
  s.time_total_s = 0.5;
  s.energy_total_j = 0.6;
  CHECK(omega_cost(s, w) == doctest::Approx(0.5));
  CHECK_THROWS_AS(omega_cost(s, ObjectiveWeights{0.6, 0.6, 1.0, 1.2}), Error);
}

TEST_CASE("evaluate_cost adds up its parts") {
  ChannelParams c = unit_snr_channel();
  const DeviceProfile p = device(90);
  const CostSample s = evaluate_cost(p, c, {1.0, 1.5e9}, 0.1, ObjectiveWeights{});
  CHECK(s.time_total_s == doctest::Approx(s.time_cmp_s + s.time_com_s));
  CHECK(s.energy_total_j == doctest::Approx(s.energy_cmp_j + s.energy_com_j));
  CHECK(s.time_cmp_s >= 0);
  CHECK(s.energy_com_j >= 0);
}

TEST_CASE("round state sampling") {
  std::vector<DeviceProfile> profiles(3, device(80));
  for (std::size_t i = 0; i < profiles.size(); ++i) profiles[i].distance_m = 100.0 * (i + 1);

  Rng a(42), b(42);
  const RoundState s1 = sample_round_state(profiles, {}, a, 1);
  const RoundState s2 = sample_round_state(profiles, {}, b, 1);
  CHECK(s1.gain_linear == s2.gain_linear);
  CHECK(s1.cpu_hz == s2.cpu_hz);

  for (DeviceProfile& p : profiles) p.cpu_std_hz = 0.0;
  const RoundState fixed = sample_round_state(profiles, {}, a, 2);
  for (std::size_t i = 0; i < profiles.size(); ++i) CHECK(fixed.cpu_hz[i] == profiles[i].mean_cpu_hz);

  // Mean of the small-scale fading power is 1.
  std::vector<DeviceProfile> one(1, device(80));
  one[0].distance_m = 1000.0;
  Rng r(9);
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += sample_round_state(one, {}, r, i).gain_linear[0] / pathloss_gain(1000.0);
  CHECK(sum / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("device placement stays on the annulus") {
  Rng rng(3);
  const auto profiles = place_devices(500, 500.0, 10.0, DeviceRanges{}, rng);
  double inner = 0;
  for (const DeviceProfile& p : profiles) {
    CHECK(p.distance_m >= 10.0);
    CHECK(p.distance_m <= 500.0);
    CHECK(p.dataset_size >= 70);
    CHECK(p.dataset_size <= 100);
    CHECK(p.mean_cpu_hz >= 1e9);
    CHECK(p.mean_cpu_hz <= 3e9);
    if (p.distance_m < 250.0) ++inner;
  }
  // Area-uniform: about (250^2 - 10^2) / (500^2 - 10^2) ~ 25% inside 250 m.
  CHECK(inner / 500.0 == doctest::Approx(0.25).epsilon(0.25));
}

TEST_CASE("validation") {
  DeviceProfile p;
  p.dataset_size = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  ChannelParams c = unit_snr_channel();
  c.num_subchannels = 5;
  CHECK_THROWS_AS(c.validate(3), Error);
  CHECK_NOTHROW(c.validate(5));
}
