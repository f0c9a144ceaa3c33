#pragma once

// Experiment driver: builds a scenario from a SimConfig, runs it, scores it
// against a clairvoyant per-round oracle, and runs parameter sweeps.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgefl/config.hpp"
#include "edgefl/fl_engine.hpp"

namespace edgefl {

struct Summary {
  std::uint64_t rounds = 0;
  std::uint64_t selections = 0;
  double sim_time_s = 0.0;
  double mean_omega = 0.0;       // per selection
  double final_regret = 0.0;     // NaN when regret was not computed
  double queue_sum_final = 0.0;
  double max_queue_per_round = 0.0;  // max_n Q_n(T) / T
  double min_service_rate = 0.0;     // min_n (samples served to n) / T
  std::int64_t max_staleness = 0;
  double time_to_target_s = 0.0;  // NaN when no target or not reached
  double final_loss = 0.0;        // NaN without learning
  double final_accuracy = 0.0;
  // Sum of queues after 0, T/10, ..., T rounds.
  std::vector<double> queue_sum_deciles;
};

struct MetricsLog {
  SimConfig config;
  std::vector<DeviceProfile> profiles;
  std::vector<fl::EventRow> rows;
  // Indexed by decided round (row order for async runs); empty without regret.
  std::vector<double> oracle_omega;
  std::vector<double> regret;
  std::vector<std::uint64_t> selection_counts;
  std::vector<double> final_queues;
  Summary summary;
};

// Everything a run needs, generated deterministically from the config seed.
struct Scenario {
  std::vector<DeviceProfile> profiles;
  std::unique_ptr<fl::FederatedData> data;  // null when learning is disabled
  fl::EngineSetup setup;
};

Scenario build_scenario(const SimConfig& config);

MetricsLog run_experiment(const SimConfig& config, const fl::EngineHooks& hooks = {});

// R(T) = (1/T) sum_{t<=T} (realized(t) - oracle(t)) for every prefix T.
std::vector<double> empirical_regret(std::span<const double> realized, std::span<const double> oracle);
std::vector<double> empirical_regret(const MetricsLog& log, std::span<const double> oracle);

// Per round, the smallest Omega any available device could have achieved at
// its optimal power given full knowledge of that round's gains and CPU
// frequencies. Rounds with no candidate fall back to `realized`.
std::vector<double> clairvoyant_oracle(std::span<const DeviceProfile> profiles, const ChannelParams& channel,
                                       const ObjectiveWeights& weights, std::span<const RoundState> states,
                                       std::span<const std::vector<std::size_t>> available,
                                       std::span<const double> realized);

// Upper bound on the time-average regret after T rounds:
// N * D_min^2 / (2V) + (2 sqrt(6 N T ln T) + 4N) / T.
double regret_bound(std::size_t num_devices, double v_weight, double d_min, std::uint64_t rounds);

enum class SweepParameter { kDMin, kLambdaE, kVWeight, kGamma, kPolicy };
SweepParameter parse_sweep_parameter(std::string_view name);
std::string_view to_string(SweepParameter p);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kDMin;
  std::vector<std::string> values;
  std::vector<sched::Policy> policies;  // empty: the config's policy
  std::vector<std::uint64_t> seeds;     // empty: the config's seed
  unsigned threads = 0;                 // 0: hardware concurrency
};

struct SweepRow {
  std::string parameter;
  std::string value;
  sched::Policy policy = sched::Policy::kCuUcb;
  std::uint64_t seed = 0;
  Summary summary;
};

// Applies `value` of `parameter` to a copy of `config`.
SimConfig apply_sweep_value(const SimConfig& config, SweepParameter parameter, const std::string& value);

// One run per (value, policy, seed) cell. Rows come back ordered by value,
// then policy, then seed regardless of execution order.
std::vector<SweepRow> sweep(const SimConfig& base, const SweepSpec& spec);

}  // namespace edgefl
