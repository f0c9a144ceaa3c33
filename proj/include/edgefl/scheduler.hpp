#pragma once

// Device selection: virtual queues for the long-term sample constraint, the
// UCB cost statistics, and the baseline policies.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "edgefl/system_model.hpp"

namespace edgefl::sched {

enum class Policy { kCuUcb, kAsQOnly, kAsFairness, kSyFairness, kRandom };

std::string_view to_string(Policy policy);
Policy parse_policy(std::string_view name);
// SyFairness is the only synchronous policy.
inline bool is_synchronous(Policy policy) { return policy == Policy::kSyFairness; }

double queue_update(double queue, double d_min, int dataset_size, bool selected);

// Optimistic (lower-confidence) cost estimate for round `round` from the
// statistics at the end of round - 1. Unexplored devices get 0.
double ucb_estimate(double mean_cost, std::uint64_t count, std::uint64_t round);

class SchedulerState {
 public:
  SchedulerState(std::size_t num_devices, double v_weight, double d_min);

  std::size_t size() const { return queue_.size(); }
  double v_weight() const { return v_weight_; }
  double d_min() const { return d_min_; }
  // Rounds completed so far; the next decision is for round() + 1.
  std::uint64_t round() const { return round_; }

  double queue(std::size_t n) const { return queue_.at(n); }
  std::uint64_t count(std::size_t n) const { return count_.at(n); }
  double mean_cost(std::size_t n) const { return mean_cost_.at(n); }
  std::span<const double> queues() const { return queue_; }
  std::span<const std::uint64_t> counts() const { return count_; }
  double queue_sum() const;
  double queue_max() const;

  double ucb(std::size_t n) const { return ucb_estimate(mean_cost_.at(n), count_.at(n), round_ + 1); }

  // Closes the current round with `device` selected: bumps its count, folds
  // `omega` into its running mean and updates every queue.
  void record_outcome(std::size_t device, double omega, int dataset_size);

  // Closes a round with several devices served at once (synchronous rounds).
  // `profiles` supplies D_n of each selected device.
  void record_round(std::span<const std::size_t> devices, std::span<const double> omegas,
                    std::span<const DeviceProfile> profiles);

  // Closes a round in which nothing could be scheduled.
  void record_idle_round();

 private:
  std::vector<double> queue_;
  std::vector<std::uint64_t> count_;
  std::vector<double> mean_cost_;
  std::uint64_t round_ = 0;
  double v_weight_;
  double d_min_;
};

// argmin over `available` of V * ucb_n - Q_n * D_n; ties go to the lowest id.
std::size_t cu_ucb_select(const SchedulerState& state, std::span<const std::size_t> available,
                          std::span<const DeviceProfile> profiles);

// Baselines. Asynchronous policies return exactly one device; SyFairness
// returns the `per_round` least-selected devices.
std::vector<std::size_t> baseline_select(Policy policy, const SchedulerState& state,
                                         std::span<const std::size_t> available,
                                         std::span<const DeviceProfile> profiles, Rng& rng,
                                         std::size_t per_round = 1);

// Dispatches to cu_ucb_select or baseline_select.
std::vector<std::size_t> select_devices(Policy policy, const SchedulerState& state,
                                        std::span<const std::size_t> available,
                                        std::span<const DeviceProfile> profiles, Rng& rng,
                                        std::size_t per_round = 1);

// Per-round drift-plus-penalty value, sum of V*x_n*Omega_n - Q_n*D_n*x_n.
// `selection` lists the chosen devices and must hold exactly one.
double drift_plus_penalty(const SchedulerState& state, std::span<const double> omega_by_device,
                          std::span<const std::size_t> selection, std::span<const DeviceProfile> profiles);

}  // namespace edgefl::sched
