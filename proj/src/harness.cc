#include "edgefl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "edgefl/error.hpp"
#include "edgefl/power_control.hpp"

namespace edgefl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags beyond the engine's own (1..3).
constexpr std::uint64_t kPlacementStream = 4;
constexpr std::uint64_t kTaskStream = 5;
constexpr std::uint64_t kPartitionStream = 6;

double parse_number(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, "sweep: '" + text + "' is not a number");
  }
}

Summary summarize(const MetricsLog& log, const fl::EventTrace& trace) {
  Summary s;
  s.rounds = trace.rounds;
  s.sim_time_s = trace.sim_time_s;
  s.max_staleness = trace.max_staleness;
  s.time_to_target_s = trace.time_to_target_s ? *trace.time_to_target_s : kNaN;
  s.final_loss = kNaN;
  s.final_accuracy = kNaN;

  double omega_sum = 0.0;
  std::vector<double> queue_by_round(trace.rounds, 0.0);
  for (const fl::EventRow& row : log.rows) {
    if (row.selected_device != fl::kNone) {
      ++s.selections;
      omega_sum += row.omega;
    }
    if (row.round >= 1 && row.round <= trace.rounds) queue_by_round[row.round - 1] = row.queue_sum;
    if (!std::isnan(row.loss)) {
      s.final_loss = row.loss;
      s.final_accuracy = row.accuracy;
    }
  }
  s.mean_omega = s.selections ? omega_sum / static_cast<double>(s.selections) : 0.0;
  s.queue_sum_final = 0.0;
  for (double q : trace.final_queues) s.queue_sum_final += q;

  if (log.config.run.compute_regret && !sched::is_synchronous(log.config.run.policy)) {
    s.final_regret = log.regret.empty() ? 0.0 : log.regret.back();
  } else {
    s.final_regret = kNaN;
  }

  const double t = static_cast<double>(trace.rounds);
  if (trace.rounds > 0) {
    double worst_q = 0.0;
    double min_rate = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < trace.final_queues.size(); ++n) {
      worst_q = std::max(worst_q, trace.final_queues[n]);
      min_rate = std::min(min_rate, static_cast<double>(trace.selection_counts[n]) * log.profiles[n].dataset_size / t);
    }
    s.max_queue_per_round = worst_q / t;
    s.min_service_rate = min_rate;
  }
  s.queue_sum_deciles.assign(11, 0.0);
  for (std::size_t k = 1; k <= 10; ++k) {
    const std::uint64_t r = trace.rounds * k / 10;
    s.queue_sum_deciles[k] = r == 0 ? 0.0 : queue_by_round[r - 1];
  }
  return s;
}

}  // namespace

Scenario build_scenario(const SimConfig& config) {
  config.validate();
  Scenario sc;
  Rng placement = fl::make_stream(config.run.seed, kPlacementStream);
  sc.profiles = place_devices(config.topology.num_devices, config.topology.radius_m,
                              config.topology.min_distance_m, config.devices.ranges, placement);

  fl::EngineSetup& s = sc.setup;
  s.profiles = sc.profiles;
  s.channel = config.channel_params();
  s.objective = config.weights();
  s.cpu_floor_hz = config.devices.cpu_floor_hz;
  s.policy = config.run.policy;
  s.v_weight = *config.objective.v_weight;
  s.d_min = config.objective.d_min;
  s.horizon = {config.run.rounds, config.run.sim_seconds};
  s.keep_round_states = config.run.compute_regret && !sched::is_synchronous(config.run.policy);
  s.task = config.learning.task;
  s.eval_every = config.learning.eval_every;
  s.stop_at_loss = config.learning.target_loss;

  if (config.learning.enabled) {
    Rng task_rng = fl::make_stream(config.run.seed, kTaskStream);
    Rng part_rng = fl::make_stream(config.run.seed, kPartitionStream);
    fl::SyntheticTask task = fl::make_synthetic_task(config.learning.task, task_rng);
    std::vector<int> sizes;
    for (const DeviceProfile& p : sc.profiles) sizes.push_back(p.dataset_size);
    fl::Partition part = fl::partition_dirichlet(task.pool, config.learning.task.num_classes, sizes,
                                                 config.learning.task.dirichlet_gamma, part_rng);
    sc.data = std::make_unique<fl::FederatedData>();
    sc.data->shards = std::move(part.shards);
    sc.data->test = std::move(task.test);
    s.data = sc.data.get();
  }
  return sc;
}

MetricsLog run_experiment(const SimConfig& config, const fl::EngineHooks& hooks) {
  Scenario sc = build_scenario(config);
  fl::EventTrace trace = fl::run(sc.setup, config.run.seed, hooks);

  MetricsLog log;
  log.config = config;
  log.profiles = sc.profiles;
  log.rows = std::move(trace.rows);
  log.selection_counts = trace.selection_counts;
  log.final_queues = trace.final_queues;

  if (sc.setup.keep_round_states) {
    std::vector<double> realized;
    realized.reserve(log.rows.size());
    for (const fl::EventRow& row : log.rows) realized.push_back(row.selected_device == fl::kNone ? 0.0 : row.omega);
    log.oracle_omega = clairvoyant_oracle(sc.profiles, sc.setup.channel, sc.setup.objective, trace.round_states,
                                          trace.available, realized);
    log.regret = empirical_regret(realized, log.oracle_omega);
  }
  log.summary = summarize(log, trace);
  return log;
}

std::vector<double> empirical_regret(std::span<const double> realized, std::span<const double> oracle) {
  if (realized.size() != oracle.size()) {
    throw Error(ErrorCode::kLengthMismatch, "empirical_regret: realized and oracle costs differ in length");
  }
  std::vector<double> out(realized.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < realized.size(); ++i) {
    gap += realized[i] - oracle[i];
    out[i] = gap / static_cast<double>(i + 1);
  }
  return out;
}

std::vector<double> empirical_regret(const MetricsLog& log, std::span<const double> oracle) {
  std::vector<double> realized;
  realized.reserve(log.rows.size());
  for (const fl::EventRow& row : log.rows) realized.push_back(row.selected_device == fl::kNone ? 0.0 : row.omega);
  return empirical_regret(realized, oracle);
}

std::vector<double> clairvoyant_oracle(std::span<const DeviceProfile> profiles, const ChannelParams& channel,
                                       const ObjectiveWeights& weights, std::span<const RoundState> states,
                                       std::span<const std::vector<std::size_t>> available,
                                       std::span<const double> realized) {
  if (states.size() != available.size() || states.size() != realized.size()) {
    throw Error(ErrorCode::kLengthMismatch, "clairvoyant_oracle: per-round inputs differ in length");
  }
  std::vector<double> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t n : available[i]) {
      const power::PowerDecision d = power::optimal_power(profiles[n], channel, slice(states[i], n), weights);
      if (d.feasible()) best = std::min(best, d.cost.omega);
    }
    out[i] = std::isfinite(best) ? best : realized[i];
  }
  return out;
}

double regret_bound(std::size_t num_devices, double v_weight, double d_min, std::uint64_t rounds) {
  const double n = static_cast<double>(num_devices);
  const double t = static_cast<double>(rounds);
  return n * d_min * d_min / (2.0 * v_weight) + (2.0 * std::sqrt(6.0 * n * t * std::log(t)) + 4.0 * n) / t;
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  for (SweepParameter p : {SweepParameter::kDMin, SweepParameter::kLambdaE, SweepParameter::kVWeight,
                           SweepParameter::kGamma, SweepParameter::kPolicy}) {
    if (name == to_string(p)) return p;
  }
  throw Error(ErrorCode::kUnknownParameter, "unknown sweep parameter '" + std::string(name) +
                                                "' (expected d_min, lambda_e, v_weight, gamma or policy)");
}

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kDMin: return "d_min";
    case SweepParameter::kLambdaE: return "lambda_e";
    case SweepParameter::kVWeight: return "v_weight";
    case SweepParameter::kGamma: return "gamma";
    case SweepParameter::kPolicy: return "policy";
  }
  return "?";
}

SimConfig apply_sweep_value(const SimConfig& config, SweepParameter parameter, const std::string& value) {
  SimConfig c = config;
  switch (parameter) {
    case SweepParameter::kDMin: c.objective.d_min = parse_number(value); break;
    case SweepParameter::kLambdaE:
      c.objective.lambda_e = parse_number(value);
      c.objective.lambda_t = 1.0 - c.objective.lambda_e;
      break;
    case SweepParameter::kVWeight: c.objective.v_weight = parse_number(value); break;
    case SweepParameter::kGamma: c.learning.task.dirichlet_gamma = parse_number(value); break;
    case SweepParameter::kPolicy: c.run.policy = sched::parse_policy(value); break;
  }
  return c;
}

std::vector<SweepRow> sweep(const SimConfig& base, const SweepSpec& spec) {
  if (spec.values.empty()) throw Error(ErrorCode::kConfig, "sweep: no values given");
  std::vector<sched::Policy> policies = spec.policies;
  if (policies.empty() || spec.parameter == SweepParameter::kPolicy) policies = {base.run.policy};
  std::vector<std::uint64_t> seeds = spec.seeds;
  if (seeds.empty()) seeds = {base.run.seed};

  std::vector<SweepRow> rows;
  std::vector<SimConfig> configs;
  for (const std::string& value : spec.values) {
    for (sched::Policy policy : policies) {
      for (std::uint64_t seed : seeds) {
        SimConfig c = base;
        c.run.policy = policy;
        c.run.seed = seed;
        c = apply_sweep_value(c, spec.parameter, value);
        c.validate();  // fail fast before spawning work
        SweepRow row;
        row.parameter = std::string(to_string(spec.parameter));
        row.value = value;
        row.policy = c.run.policy;
        row.seed = seed;
        rows.push_back(std::move(row));
        configs.push_back(std::move(c));
      }
    }
  }

  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(rows.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        rows[i].summary = run_experiment(configs[i]).summary;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = rows.size();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace edgefl
