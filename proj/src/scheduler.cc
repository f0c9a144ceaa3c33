#include "edgefl/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "edgefl/error.hpp"

namespace edgefl::sched {
namespace {

void require_nonempty(std::span<const std::size_t> available) {
  if (available.empty()) throw Error(ErrorCode::kEmptySet, "no available device to select");
}

void require_device(std::size_t device, std::size_t n) {
  if (device >= n) {
    throw Error(ErrorCode::kUnknownDevice, "unknown device " + std::to_string(device));
  }
}

// Lowest id among the minimizers of key(n).
template <typename Key>
std::size_t argmin_by(std::span<const std::size_t> available, Key key) {
  std::size_t best = available.front();
  auto best_key = key(best);
  for (std::size_t n : available.subspan(1)) {
    const auto k = key(n);
    if (k < best_key || (k == best_key && n < best)) {
      best = n;
      best_key = k;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::kCuUcb: return "cu-ucb";
    case Policy::kAsQOnly: return "as-q-only";
    case Policy::kAsFairness: return "as-fairness";
    case Policy::kSyFairness: return "sy-fairness";
    case Policy::kRandom: return "random";
  }
  return "?";
}

Policy parse_policy(std::string_view name) {
  for (Policy p : {Policy::kCuUcb, Policy::kAsQOnly, Policy::kAsFairness, Policy::kSyFairness, Policy::kRandom}) {
    if (name == to_string(p)) return p;
  }
  throw Error(ErrorCode::kConfig, "unknown policy '" + std::string(name) +
                                      "' (expected cu-ucb, as-q-only, as-fairness, sy-fairness or random)");
}

double queue_update(double queue, double d_min, int dataset_size, bool selected) {
  const double served = selected ? static_cast<double>(dataset_size) : 0.0;
  return std::max(queue + d_min - served, 0.0);
}

double ucb_estimate(double mean_cost, std::uint64_t count, std::uint64_t round) {
  if (count == 0) return 0.0;
  const double bonus = std::sqrt(3.0 * std::log(static_cast<double>(round)) / (2.0 * static_cast<double>(count)));
  return std::max(mean_cost - bonus, 0.0);
}

SchedulerState::SchedulerState(std::size_t num_devices, double v_weight, double d_min)
    : queue_(num_devices, 0.0), count_(num_devices, 0), mean_cost_(num_devices, 0.0), v_weight_(v_weight),
      d_min_(d_min) {
  if (v_weight < 0.0) throw Error(ErrorCode::kConfig, "v_weight must be >= 0");
  if (!(d_min >= 0.0)) throw Error(ErrorCode::kConfig, "d_min must be >= 0");
}

double SchedulerState::queue_sum() const { return std::accumulate(queue_.begin(), queue_.end(), 0.0); }

double SchedulerState::queue_max() const {
  return queue_.empty() ? 0.0 : *std::max_element(queue_.begin(), queue_.end());
}

void SchedulerState::record_outcome(std::size_t device, double omega, int dataset_size) {
  require_device(device, size());
  for (std::size_t n = 0; n < size(); ++n) {
    queue_[n] = queue_update(queue_[n], d_min_, n == device ? dataset_size : 0, n == device);
  }
  ++count_[device];
  mean_cost_[device] += (omega - mean_cost_[device]) / static_cast<double>(count_[device]);
  ++round_;
}

void SchedulerState::record_round(std::span<const std::size_t> devices, std::span<const double> omegas,
                                  std::span<const DeviceProfile> profiles) {
  if (devices.size() != omegas.size()) {
    throw Error(ErrorCode::kLengthMismatch, "record_round: devices and omegas differ in length");
  }
  std::vector<int> served(size(), 0);
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const std::size_t d = devices[i];
    require_device(d, size());
    served[d] = profiles[d].dataset_size;
    ++count_[d];
    mean_cost_[d] += (omegas[i] - mean_cost_[d]) / static_cast<double>(count_[d]);
  }
  for (std::size_t n = 0; n < size(); ++n) {
    queue_[n] = queue_update(queue_[n], d_min_, served[n], served[n] > 0);
  }
  ++round_;
}

void SchedulerState::record_idle_round() {
  for (double& q : queue_) q = queue_update(q, d_min_, 0, false);
  ++round_;
}

std::size_t cu_ucb_select(const SchedulerState& state, std::span<const std::size_t> available,
                          std::span<const DeviceProfile> profiles) {
  require_nonempty(available);
  for (std::size_t n : available) require_device(n, state.size());
  return argmin_by(available, [&](std::size_t n) {
    return state.v_weight() * state.ucb(n) - state.queue(n) * profiles[n].dataset_size;
  });
}

std::vector<std::size_t> baseline_select(Policy policy, const SchedulerState& state,
                                         std::span<const std::size_t> available,
                                         std::span<const DeviceProfile> profiles, Rng& rng,
                                         std::size_t per_round) {
  require_nonempty(available);
  for (std::size_t n : available) require_device(n, state.size());
  switch (policy) {
    case Policy::kCuUcb:
      return {cu_ucb_select(state, available, profiles)};
    case Policy::kAsQOnly:
      return {argmin_by(available, [&](std::size_t n) { return -state.queue(n) * profiles[n].dataset_size; })};
    case Policy::kAsFairness:
      return {argmin_by(available, [&](std::size_t n) { return state.count(n); })};
    case Policy::kRandom: {
      std::uniform_int_distribution<std::size_t> pick(0, available.size() - 1);
      return {available[pick(rng)]};
    }
    case Policy::kSyFairness: {
      std::vector<std::size_t> order(available.begin(), available.end());
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return state.count(a) != state.count(b) ? state.count(a) < state.count(b) : a < b;
      });
      order.resize(std::min(per_round, order.size()));
      return order;
    }
  }
  return {};
}

std::vector<std::size_t> select_devices(Policy policy, const SchedulerState& state,
                                        std::span<const std::size_t> available,
                                        std::span<const DeviceProfile> profiles, Rng& rng, std::size_t per_round) {
  return baseline_select(policy, state, available, profiles, rng, per_round);
}

double drift_plus_penalty(const SchedulerState& state, std::span<const double> omega_by_device,
                          std::span<const std::size_t> selection, std::span<const DeviceProfile> profiles) {
  if (omega_by_device.size() != state.size()) {
    throw Error(ErrorCode::kLengthMismatch, "drift_plus_penalty: need one cost per device");
  }
  if (selection.size() != 1) {
    throw Error(ErrorCode::kConstraintC3, "drift_plus_penalty: exactly one device must be selected, got " +
                                              std::to_string(selection.size()));
  }
  const std::size_t n = selection.front();
  require_device(n, state.size());
  return state.v_weight() * omega_by_device[n] - state.queue(n) * profiles[n].dataset_size;
}

}  // namespace edgefl::sched
