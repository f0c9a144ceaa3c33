#include "edgefl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "edgefl/export.hpp"
#include "edgefl/harness.hpp"
#include "edgefl/numerics.hpp"
#include "edgefl/power_control.hpp"

namespace edgefl {
namespace {

using numerics::Branch;
using numerics::lambert_w;

std::string fmt(double v) { return format_real(v); }

CheckResult check_lambert(std::size_t samples, Rng& rng) {
  // Half the samples go w -> w e^w -> W, half go x -> W(x) -> W e^W.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < samples / 2; ++i) {
    const bool secondary = i % 2 == 1;
    const double w = secondary ? -std::exp(u(rng) * std::log(60.0)) - 1e-6  // (-60, -1)
                               : -1.0 + 1e-6 + u(rng) * 40.0;
    const double x = w * std::exp(w);
    const double back = lambert_w(secondary ? Branch::kSecondary : Branch::kPrincipal, x);
    worst = std::max(worst, std::abs(back - w) / std::max(1.0, std::abs(w)));
  }
  for (std::size_t i = 0; i < samples - samples / 2; ++i) {
    const bool secondary = i % 2 == 1;
    const double x = secondary ? -numerics::kInvE * u(rng) : -numerics::kInvE + u(rng) * (1e6 + numerics::kInvE);
    if (secondary && x == 0.0) continue;
    const double w = lambert_w(secondary ? Branch::kSecondary : Branch::kPrincipal, x);
    worst = std::max(worst, std::abs(w * std::exp(w) - x) / std::max(1.0, std::abs(x)));
  }
  return {"lambert_w_round_trip", worst <= 1e-9, "max error " + fmt(worst) + " over " + std::to_string(samples)};
}

CheckResult check_power(const SimConfig& base, std::size_t instances, std::size_t grid, Rng& rng) {
  const ChannelParams channel = base.channel_params();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> fading(1.0);
  std::size_t cases[3] = {0, 0, 0};
  double worst = -1.0;
  std::size_t done = 0, attempts = 0;
  while (done < instances && attempts < 1000 * instances) {
    ++attempts;
    DeviceProfile p;
    const double r0 = base.topology.min_distance_m, r1 = base.topology.radius_m;
    p.distance_m = std::sqrt(r0 * r0 + u(rng) * (r1 * r1 - r0 * r0));
    p.dataset_size = base.devices.ranges.dataset_size_min +
                     static_cast<int>(u(rng) * (base.devices.ranges.dataset_size_max -
                                                base.devices.ranges.dataset_size_min + 1));
    ObjectiveWeights w = base.weights();
    // lambda_t / lambda_e log-uniform over twelve decades reaches all three cases.
    const double ratio = std::exp(std::log(1e-6) + u(rng) * std::log(1e12));
    w.lambda_t = ratio / (1.0 + ratio);
    w.lambda_e = 1.0 / (1.0 + ratio);
    const DeviceRound round{pathloss_gain(p.distance_m, channel.pathloss) * fading(rng),
                            base.devices.ranges.mean_cpu_hz_min +
                                u(rng) * (base.devices.ranges.mean_cpu_hz_max - base.devices.ranges.mean_cpu_hz_min)};
    const power::PowerDecision d = power::optimal_power(p, channel, round, w);
    if (!d.feasible()) continue;
    const power::GridOptimum g = power::oracle_power_grid(p, channel, round, w, grid);
    worst = std::max(worst, (d.cost.omega - g.omega) / std::abs(g.omega));
    ++cases[static_cast<int>(d.case_taken)];
    ++done;
  }
  const bool all_cases = cases[0] && cases[1] && cases[2];
  std::ostringstream msg;
  msg << done << " instances, worst relative excess " << fmt(worst) << ", cases lower/upper/interior = " << cases[0]
      << "/" << cases[1] << "/" << cases[2];
  return {"power_control_vs_grid", done == instances && worst <= 1e-8 && all_cases, msg.str()};
}

SimConfig short_run(const SimConfig& base, std::uint64_t rounds, std::uint64_t seed) {
  SimConfig c = base;
  c.run.rounds = rounds;
  c.run.seed = seed;
  c.run.sim_seconds = std::numeric_limits<double>::infinity();
  c.learning.target_loss.reset();
  return c;
}

CheckResult check_constraints(const SimConfig& base, std::uint64_t rounds, std::uint64_t seed) {
  double t_excess = -std::numeric_limits<double>::infinity();
  double e_excess = -std::numeric_limits<double>::infinity();
  std::size_t selections = 0;
  for (sched::Policy policy : {sched::Policy::kCuUcb, sched::Policy::kAsQOnly, sched::Policy::kAsFairness,
                               sched::Policy::kSyFairness, sched::Policy::kRandom}) {
    SimConfig c = short_run(base, rounds, seed);
    c.run.policy = policy;
    c.run.compute_regret = false;
    const MetricsLog log = run_experiment(c);
    for (const fl::EventRow& row : log.rows) {
      if (row.selected_device == fl::kNone) continue;
      ++selections;
      t_excess = std::max(t_excess, row.time_total_s - c.objective.t_max_s);
      e_excess = std::max(e_excess, row.energy_total_j - c.objective.e_max_j);
    }
  }
  return {"latency_and_energy_budgets", t_excess <= 1e-9 && e_excess <= 1e-9,
          std::to_string(selections) + " selections, max T - T_max = " + fmt(t_excess) +
              " s, max E - E_max = " + fmt(e_excess) + " J"};
}

CheckResult check_staleness() {
  bool ok = fl::staleness_weight(1.0, 7, 7, 0.5) == 1.0;
  double prev = 1.0;
  for (std::uint64_t lag = 1; lag <= 1000 && ok; ++lag) {
    const double s = fl::staleness_weight(1.0, 1000 + lag, 1000, 0.5);
    ok = s < prev && s > 0.0;
    prev = s;
  }
  return {"staleness_weight", ok, "s(0) = 1, strictly decreasing over lags 1..1000"};
}

CheckResult check_aggregation(const SimConfig& base, std::uint64_t rounds, std::uint64_t seed) {
  SimConfig c = short_run(base, rounds, seed);
  c.learning.enabled = true;
  c.learning.eval_every = rounds;
  c.run.compute_regret = false;
  double worst = 0.0;
  std::size_t events = 0;
  bool weights_ok = true;
  fl::EngineHooks hooks;
  hooks.on_aggregate = [&](const fl::AggregationEvent& ev) {
    ++events;
    const double expected_rho =
        fl::staleness_weight(c.learning.task.rho, ev.round, ev.round - ev.staleness, c.learning.task.staleness_exponent);
    if (!(ev.rho_t > 0.0 && ev.rho_t < 1.0) || ev.rho_t != expected_rho) weights_ok = false;
    for (std::size_t i = 0; i < ev.after->weights.size(); ++i) {
      const double want = (1.0 - ev.rho_t) * ev.before->weights[i] + ev.rho_t * ev.local->weights[i];
      const double scale = std::max({1.0, std::abs(ev.before->weights[i]), std::abs(ev.local->weights[i])});
      worst = std::max(worst, std::abs(ev.after->weights[i] - want) / scale);
    }
  };
  run_experiment(c, hooks);
  return {"aggregation_convex_combination", events > 0 && weights_ok && worst <= 1e-12,
          std::to_string(events) + " aggregation events, worst deviation " + fmt(worst)};
}

CheckResult check_gradient(Rng& rng) {
  fl::TaskSpec spec;
  spec.num_classes = 4;
  spec.feature_dim = 6;
  spec.samples_per_class = 20;
  spec.test_samples_per_class = 5;
  const fl::SyntheticTask task = fl::make_synthetic_task(spec, rng);
  const fl::SoftmaxRegression f(task.pool, spec.num_classes);
  std::normal_distribution<double> nd(0.0, 0.3);
  std::vector<double> w(f.dimension()), anchor(f.dimension()), g(f.dimension());
  for (double& x : w) x = nd(rng);
  for (double& x : anchor) x = nd(rng);
  fl::proximal_gradient(f, w, anchor, spec.prox_m, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(w[i]));
    std::vector<double> wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    const double fd = (fl::proximal_loss(f, wp, anchor, spec.prox_m) - fl::proximal_loss(f, wm, anchor, spec.prox_m)) /
                      (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max(1e-3, std::abs(g[i])));
  }
  return {"local_gradient_vs_finite_difference", worst <= 1e-5, "worst relative error " + fmt(worst)};
}

CheckResult check_regret(const SimConfig& base, std::uint64_t rounds, std::uint64_t seed) {
  SimConfig c = short_run(base, rounds, seed);
  c.run.policy = sched::Policy::kCuUcb;
  c.run.compute_regret = true;
  const MetricsLog log = run_experiment(c);
  bool oracle_ok = true;
  double worst_margin = -std::numeric_limits<double>::infinity();
  const std::size_t n = c.topology.num_devices;
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    if (log.rows[i].selected_device != fl::kNone && log.oracle_omega[i] > log.rows[i].omega * (1.0 + 1e-12)) {
      oracle_ok = false;
    }
    const std::uint64_t t = i + 1;
    if (t >= n && t >= 2) {
      worst_margin = std::max(worst_margin,
                              log.regret[i] - regret_bound(n, *c.objective.v_weight, c.objective.d_min, t));
    }
  }
  return {"clairvoyant_oracle_and_regret_bound", oracle_ok && worst_margin <= 0.0,
          "oracle <= realized every round: " + std::string(oracle_ok ? "yes" : "no") +
              ", max(regret - bound) = " + fmt(worst_margin)};
}

CheckResult check_determinism(const SimConfig& base, std::uint64_t rounds, std::uint64_t seed) {
  SimConfig c = short_run(base, rounds, seed);
  const std::string a = events_csv(run_experiment(c));
  const std::string b = events_csv(run_experiment(c));
  return {"deterministic_replay", a == b, std::to_string(a.size()) + " bytes of CSV compared"};
}

}  // namespace

std::vector<CheckResult> run_verification(const SimConfig& base, const VerifyOptions& options) {
  base.validate();
  Rng rng = fl::make_stream(options.seed, 0x5eed);
  std::vector<CheckResult> out;
  const auto guarded = [&](const char* name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("lambert_w_round_trip", [&] { return check_lambert(options.lambert_samples, rng); });
  guarded("power_control_vs_grid", [&] { return check_power(base, options.power_instances, options.power_grid, rng); });
  guarded("latency_and_energy_budgets", [&] { return check_constraints(base, options.sim_rounds, options.seed); });
  guarded("staleness_weight", [&] { return check_staleness(); });
  guarded("aggregation_convex_combination",
          [&] { return check_aggregation(base, std::min<std::uint64_t>(options.sim_rounds, 300), options.seed); });
  guarded("local_gradient_vs_finite_difference", [&] { return check_gradient(rng); });
  guarded("clairvoyant_oracle_and_regret_bound", [&] { return check_regret(base, options.sim_rounds, options.seed); });
  guarded("deterministic_replay", [&] { return check_determinism(base, options.sim_rounds, options.seed); });
  return out;
}

}  // namespace edgefl
