#pragma once

// Event-driven federated learning over simulated wall-clock time.
//
// Asynchronous mode keeps up to M jobs in flight (one per sub-channel). Each
// job completion triggers one staleness-weighted aggregation, advances the
// global round, and dispatches one newly selected idle device. Synchronous
// mode trains M devices per round and waits for the slowest.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "edgefl/learning.hpp"
#include "edgefl/power_control.hpp"
#include "edgefl/scheduler.hpp"
#include "edgefl/system_model.hpp"

namespace edgefl::fl {

struct Horizon {
  std::uint64_t rounds = 0;
  double sim_seconds = std::numeric_limits<double>::infinity();
};

// Training data split across devices plus a held-out evaluation set.
struct FederatedData {
  std::vector<LabeledData> shards;  // one per device
  LabeledData test;
};

struct EngineSetup {
  std::vector<DeviceProfile> profiles;
  ChannelParams channel;
  ObjectiveWeights objective;
  double cpu_floor_hz = 1e8;
  sched::Policy policy = sched::Policy::kCuUcb;
  double v_weight = 0.0;
  double d_min = 1.0;
  Horizon horizon;
  bool keep_round_states = false;  // needed for regret against the clairvoyant oracle

  // Learning. With no data the engine only simulates scheduling and costs.
  const FederatedData* data = nullptr;
  TaskSpec task;
  std::uint64_t eval_every = 1;
  std::optional<double> stop_at_loss;
};

inline constexpr std::int64_t kNone = -1;

struct EventRow {
  std::uint64_t round = 0;
  double sim_time_s = 0.0;
  std::int64_t completed_device = kNone;
  std::int64_t staleness = kNone;
  std::int64_t selected_device = kNone;
  power::PowerCase power_case = power::PowerCase::kInfeasible;
  double power_w = 0.0;
  double omega = 0.0;
  double time_total_s = 0.0;
  double energy_total_j = 0.0;
  double queue_sum = 0.0;
  double queue_max = 0.0;
  double loss = std::numeric_limits<double>::quiet_NaN();
  double accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct EventTrace {
  std::vector<EventRow> rows;
  // Per decided round (when keep_round_states): the realization the policy saw
  // and the devices it could pick from.
  std::vector<RoundState> round_states;
  std::vector<std::vector<std::size_t>> available;
  std::vector<double> final_queues;
  std::vector<std::uint64_t> selection_counts;
  std::uint64_t rounds = 0;
  double sim_time_s = 0.0;
  std::int64_t max_staleness = 0;
  std::size_t max_in_flight = 0;
  std::optional<double> time_to_target_s;
  ModelVector final_model;
};

struct AggregationEvent {
  std::uint64_t round = 0;
  std::uint64_t staleness = 0;
  double rho_t = 0.0;
  const ModelVector* before = nullptr;
  const ModelVector* local = nullptr;
  const ModelVector* after = nullptr;
};

struct EngineHooks {
  std::function<void(const AggregationEvent&)> on_aggregate;
};

// Independent generator per concern, so that policies run on the same seed
// see the same channel and CPU realizations.
struct RngStreams {
  Rng channel;
  Rng policy;
  Rng bootstrap;
  static RngStreams from_seed(std::uint64_t seed);
};

Rng make_stream(std::uint64_t seed, std::uint64_t tag);

// Power rule each policy uses once a device is chosen: every policy except
// AsFairness runs the closed-form optimizer.
power::PowerDecision decide_power(sched::Policy policy, const DeviceProfile& profile, const ChannelParams& channel,
                                  DeviceRound round, const ObjectiveWeights& weights);

EventTrace run_async(const EngineSetup& setup, std::uint64_t seed, const EngineHooks& hooks = {});
EventTrace run_sync(const EngineSetup& setup, std::uint64_t seed, const EngineHooks& hooks = {});
// run_sync for SyFairness, run_async otherwise.
EventTrace run(const EngineSetup& setup, std::uint64_t seed, const EngineHooks& hooks = {});

}  // namespace edgefl::fl
