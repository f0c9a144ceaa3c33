#include "edgefl/fl_engine.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "edgefl/error.hpp"

namespace edgefl::fl {
namespace {

constexpr int kMaxResamples = 1000;

struct Job {
  double completion_time = 0.0;
  std::size_t device = 0;
  std::uint64_t issued_version = 0;
  ModelVector local;

  // min-heap on (completion_time, device)
  bool operator>(const Job& other) const {
    return completion_time != other.completion_time ? completion_time > other.completion_time
                                                    : device > other.device;
  }
};

void validate_setup(const EngineSetup& s) {
  if (s.profiles.empty()) throw Error(ErrorCode::kConfig, "engine: no devices");
  if (s.channel.num_subchannels > s.profiles.size()) {
    throw Error(ErrorCode::kConfig, "engine: more sub-channels (M) than devices (N)");
  }
  s.channel.validate(s.profiles.size());
  s.objective.validate();
  if (s.data) {
    s.task.validate();
    if (s.data->shards.size() != s.profiles.size()) {
      throw Error(ErrorCode::kConfig, "engine: need exactly one data shard per device");
    }
    if (s.eval_every == 0) throw Error(ErrorCode::kConfig, "engine: eval_every must be >= 1");
  }
}

// Cost decisions for the candidate devices; returns the feasible ones.
std::vector<std::size_t> feasible_candidates(const EngineSetup& s, const RoundState& state,
                                             const std::vector<std::size_t>& candidates,
                                             std::vector<power::PowerDecision>& decisions) {
  std::vector<std::size_t> feasible;
  for (std::size_t n : candidates) {
    decisions[n] = decide_power(s.policy, s.profiles[n], s.channel, slice(state, n), s.objective);
    if (decisions[n].feasible()) feasible.push_back(n);
  }
  return feasible;
}

void maybe_evaluate(const EngineSetup& s, const ModelVector& global, std::uint64_t round, double now,
                    EventRow& row, EventTrace& trace) {
  if (!s.data || round % s.eval_every != 0) return;
  const Evaluation ev = evaluate(global, s.data->test, s.task.num_classes);
  row.loss = ev.loss;
  row.accuracy = ev.accuracy;
  if (s.stop_at_loss && !trace.time_to_target_s && ev.loss <= *s.stop_at_loss) trace.time_to_target_s = now;
}

void finish(const sched::SchedulerState& state, EventTrace& trace) {
  trace.final_queues.assign(state.queues().begin(), state.queues().end());
  trace.selection_counts.assign(state.counts().begin(), state.counts().end());
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(0x9e3779b9u)};
  return Rng(seq);
}

RngStreams RngStreams::from_seed(std::uint64_t seed) {
  return {make_stream(seed, 1), make_stream(seed, 2), make_stream(seed, 3)};
}

power::PowerDecision decide_power(sched::Policy policy, const DeviceProfile& profile, const ChannelParams& channel,
                                  DeviceRound round, const ObjectiveWeights& weights) {
  if (policy == sched::Policy::kAsFairness) return power::max_feasible_power(profile, channel, round, weights);
  return power::optimal_power(profile, channel, round, weights);
}

EventTrace run_async(const EngineSetup& s, std::uint64_t seed, const EngineHooks& hooks) {
  validate_setup(s);
  if (sched::is_synchronous(s.policy)) {
    throw Error(ErrorCode::kConfig, "run_async: synchronous policy " + std::string(sched::to_string(s.policy)));
  }
  const std::size_t n_dev = s.profiles.size();
  const std::size_t m = s.channel.num_subchannels;
  RngStreams rng = RngStreams::from_seed(seed);
  sched::SchedulerState state(n_dev, s.v_weight, s.d_min);
  EventTrace trace;

  ModelVector global = s.data ? zero_model(s.task) : ModelVector{};
  std::priority_queue<Job, std::vector<Job>, std::greater<>> in_flight;
  std::vector<bool> busy(n_dev, false);
  std::vector<power::PowerDecision> decisions(n_dev);

  const auto dispatch = [&](std::size_t device, double now, const power::PowerDecision& d) {
    Job job;
    job.device = device;
    job.issued_version = global.version;
    job.completion_time = now + d.cost.time_total_s;
    if (s.data) job.local = local_train(global, s.data->shards[device], s.task);
    busy[device] = true;
    in_flight.push(std::move(job));
    trace.max_in_flight = std::max(trace.max_in_flight, in_flight.size());
  };

  // t = 0: M random devices start training (among those feasible this round).
  {
    std::vector<std::size_t> all(n_dev);
    for (std::size_t n = 0; n < n_dev; ++n) all[n] = n;
    for (int attempt = 0; attempt < kMaxResamples && in_flight.empty(); ++attempt) {
      const RoundState s0 = sample_round_state(s.profiles, s.channel.pathloss, rng.channel, 0, s.cpu_floor_hz);
      std::vector<std::size_t> feasible = feasible_candidates(s, s0, all, decisions);
      std::shuffle(feasible.begin(), feasible.end(), rng.bootstrap);
      feasible.resize(std::min(m, feasible.size()));
      std::sort(feasible.begin(), feasible.end());
      for (std::size_t n : feasible) dispatch(n, 0.0, decisions[n]);
    }
    if (in_flight.empty() && s.horizon.rounds > 0) {
      throw Error(ErrorCode::kInfeasible, "run_async: no device is feasible at start-up");
    }
  }

  double now = 0.0;
  std::vector<std::size_t> idle;
  while (state.round() < s.horizon.rounds && now < s.horizon.sim_seconds && !in_flight.empty()) {
    Job job = in_flight.top();
    in_flight.pop();
    now = job.completion_time;
    busy[job.device] = false;

    const std::uint64_t lag = global.version - job.issued_version;
    const std::uint64_t t = global.version + 1;
    if (s.data) {
      const double rho_t = staleness_weight(s.task.rho, global.version, job.issued_version, s.task.staleness_exponent);
      ModelVector next = aggregate(global, job.local, rho_t, t);
      if (hooks.on_aggregate) hooks.on_aggregate({t, lag, rho_t, &global, &job.local, &next});
      global = std::move(next);
    } else {
      global.version = t;
    }
    trace.max_staleness = std::max(trace.max_staleness, static_cast<std::int64_t>(lag));

    EventRow row;
    row.round = t;
    row.sim_time_s = now;
    row.completed_device = static_cast<std::int64_t>(job.device);
    row.staleness = static_cast<std::int64_t>(lag);

    idle.clear();
    for (std::size_t n = 0; n < n_dev; ++n) {
      if (!busy[n]) idle.push_back(n);
    }
    bool dispatched = false;
    for (int attempt = 0; attempt < kMaxResamples && !dispatched; ++attempt) {
      const RoundState st = sample_round_state(s.profiles, s.channel.pathloss, rng.channel, t, s.cpu_floor_hz);
      const std::vector<std::size_t> feasible = feasible_candidates(s, st, idle, decisions);
      if (feasible.empty()) {
        // nothing else running: redraw the round, otherwise let it pass
        if (!in_flight.empty()) break;
        continue;
      }
      const std::size_t pick = sched::select_devices(s.policy, state, feasible, s.profiles, rng.policy).front();
      const power::PowerDecision& d = decisions[pick];
      if (s.keep_round_states) {
        trace.round_states.push_back(st);
        trace.available.push_back(feasible);
      }
      state.record_outcome(pick, d.cost.omega, s.profiles[pick].dataset_size);
      dispatch(pick, now, d);
      row.selected_device = static_cast<std::int64_t>(pick);
      row.power_case = d.case_taken;
      row.power_w = d.power_w;
      row.omega = d.cost.omega;
      row.time_total_s = d.cost.time_total_s;
      row.energy_total_j = d.cost.energy_total_j;
      dispatched = true;
    }
    if (!dispatched) {
      if (in_flight.empty()) throw Error(ErrorCode::kInfeasible, "run_async: no feasible device for round " + std::to_string(t));
      if (s.keep_round_states) {
        trace.round_states.emplace_back();
        trace.available.emplace_back();
      }
      state.record_idle_round();
    }
    row.queue_sum = state.queue_sum();
    row.queue_max = state.queue_max();
    maybe_evaluate(s, global, t, now, row, trace);
    trace.rows.push_back(row);
    if (s.stop_at_loss && trace.time_to_target_s) break;
  }

  trace.rounds = state.round();
  trace.sim_time_s = now;
  trace.final_model = std::move(global);
  finish(state, trace);
  return trace;
}

EventTrace run_sync(const EngineSetup& s, std::uint64_t seed, const EngineHooks& /*hooks*/) {
  validate_setup(s);
  const std::size_t n_dev = s.profiles.size();
  const std::size_t m = s.channel.num_subchannels;
  RngStreams rng = RngStreams::from_seed(seed);
  sched::SchedulerState state(n_dev, s.v_weight, s.d_min);
  EventTrace trace;
  ModelVector global = s.data ? zero_model(s.task) : ModelVector{};
  std::vector<power::PowerDecision> decisions(n_dev);
  std::vector<std::size_t> all(n_dev);
  for (std::size_t n = 0; n < n_dev; ++n) all[n] = n;

  EngineSetup optimized = s;
  optimized.policy = sched::Policy::kSyFairness;

  double now = 0.0;
  while (state.round() < s.horizon.rounds && now < s.horizon.sim_seconds) {
    const std::uint64_t t = state.round() + 1;
    std::vector<std::size_t> chosen;
    RoundState st;
    for (int attempt = 0; attempt < kMaxResamples && chosen.empty(); ++attempt) {
      st = sample_round_state(s.profiles, s.channel.pathloss, rng.channel, t, s.cpu_floor_hz);
      const std::vector<std::size_t> feasible = feasible_candidates(optimized, st, all, decisions);
      if (!feasible.empty()) {
        chosen = sched::baseline_select(sched::Policy::kSyFairness, state, feasible, s.profiles, rng.policy, m);
      }
    }
    if (chosen.empty()) throw Error(ErrorCode::kInfeasible, "run_sync: no feasible device for round " + std::to_string(t));
    if (s.keep_round_states) {
      trace.round_states.push_back(st);
      trace.available.push_back(chosen);
    }

    // The round lasts until the slowest participant has uploaded.
    double duration = 0.0;
    for (std::size_t n : chosen) duration = std::max(duration, decisions[n].cost.time_total_s);
    now += duration;

    if (s.data) {
      ModelVector next;
      next.version = t;
      next.weights.assign(global.weights.size(), 0.0);
      double total = 0.0;
      for (std::size_t n : chosen) total += s.profiles[n].dataset_size;
      for (std::size_t n : chosen) {
        const ModelVector local = local_train(global, s.data->shards[n], s.task);
        const double w = s.profiles[n].dataset_size / total;
        for (std::size_t i = 0; i < next.weights.size(); ++i) next.weights[i] += w * local.weights[i];
      }
      global = std::move(next);
    } else {
      global.version = t;
    }

    std::vector<double> omegas;
    std::vector<EventRow> rows;
    for (std::size_t n : chosen) {
      // A participant's update is only usable once the round closes, so its
      // latency is the round duration.
      CostSample c = decisions[n].cost;
      c.time_total_s = duration;
      c.omega = omega_cost(c, s.objective);
      omegas.push_back(c.omega);
      EventRow row;
      row.round = t;
      row.sim_time_s = now;
      row.completed_device = static_cast<std::int64_t>(n);
      row.staleness = 0;
      row.selected_device = static_cast<std::int64_t>(n);
      row.power_case = decisions[n].case_taken;
      row.power_w = decisions[n].power_w;
      row.omega = c.omega;
      row.time_total_s = c.time_total_s;
      row.energy_total_j = c.energy_total_j;
      rows.push_back(row);
    }
    state.record_round(chosen, omegas, s.profiles);
    trace.max_in_flight = std::max(trace.max_in_flight, chosen.size());
    for (EventRow& row : rows) {
      row.queue_sum = state.queue_sum();
      row.queue_max = state.queue_max();
    }
    maybe_evaluate(s, global, t, now, rows.back(), trace);
    trace.rows.insert(trace.rows.end(), rows.begin(), rows.end());
    if (s.stop_at_loss && trace.time_to_target_s) break;
  }

  trace.rounds = state.round();
  trace.sim_time_s = now;
  trace.final_model = std::move(global);
  finish(state, trace);
  return trace;
}

EventTrace run(const EngineSetup& setup, std::uint64_t seed, const EngineHooks& hooks) {
  return sched::is_synchronous(setup.policy) ? run_sync(setup, seed, hooks) : run_async(setup, seed, hooks);
}

}  // namespace edgefl::fl
