#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "edgefl/error.hpp"
#include "edgefl/scheduler.hpp"

using namespace edgefl;
using namespace edgefl::sched;

namespace {

std::vector<DeviceProfile> profiles_with_sizes(std::vector<int> sizes) {
  std::vector<DeviceProfile> out(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    out[i].id = i;
    out[i].dataset_size = sizes[i];
  }
  return out;
}

std::vector<std::size_t> all_ids(std::size_t n) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

TEST_CASE("policy names round-trip") {
  for (Policy p : {Policy::kCuUcb, Policy::kAsQOnly, Policy::kAsFairness, Policy::kSyFairness, Policy::kRandom}) {
    CHECK(parse_policy(to_string(p)) == p);
    CHECK(is_synchronous(p) == (p == Policy::kSyFairness));
  }
  CHECK_THROWS_AS(parse_policy("greedy"), Error);
}

TEST_CASE("queue update") {
  CHECK(queue_update(0, 80, 100, true) == 0);
  CHECK(queue_update(5, 80, 100, false) == 85);
  CHECK(queue_update(5, 80, 90, true) == 0);
  CHECK(queue_update(50, 80, 70, true) == 60);
}

TEST_CASE("ucb estimate") {
  CHECK(ucb_estimate(0.9, 0, 7) == 0.0);
  CHECK(ucb_estimate(2.0, 50, 100) == doctest::Approx(2.0 - std::sqrt(3.0 * std::log(100.0) / 100.0)).epsilon(1e-14));
  CHECK(ucb_estimate(2.0, 50, 100) == doctest::Approx(1.6283).epsilon(1e-4));
  CHECK(ucb_estimate(0.5, 2, 10) == 0.0);
  CHECK(ucb_estimate(0.3, 5, 1) == 0.3);  // ln 1 = 0
}

TEST_CASE("cu_ucb_select") {
  const auto profiles = profiles_with_sizes({80, 80});
  SchedulerState s(2, 1.0, 0.0);
  // Explore both once so the estimate is positive, then compare V*s~ only.
  s.record_outcome(0, 10.0, 80);
  s.record_outcome(1, 5.0, 80);
  // Large counts shrink the bonus; fill up so the bonus is negligible.
  for (int i = 0; i < 2000; ++i) {
    s.record_outcome(0, 10.0, 80);
    s.record_outcome(1, 5.0, 80);
  }
  const std::vector<std::size_t> both = {0, 1};
  CHECK(cu_ucb_select(s, both, profiles) == 1);

  SchedulerState fresh(3, 100.0, 0.0);
  for (int i = 0; i < 100; ++i) {
    fresh.record_outcome(0, 0.4, 80);
    fresh.record_outcome(1, 0.4, 80);
  }
  REQUIRE(fresh.ucb(0) > 0.0);
  const auto three = profiles_with_sizes({80, 80, 80});
  CHECK(cu_ucb_select(fresh, all_ids(3), three) == 2);

  SchedulerState tie(3, 1.0, 0.0);
  CHECK(cu_ucb_select(tie, std::vector<std::size_t>{2, 1}, three) == 1);
}

TEST_CASE("queue term drives selection when V = 0, matching AsQOnly") {
  std::mt19937_64 rng(1);
  const auto profiles = profiles_with_sizes({70, 85, 100, 92, 77});
  SchedulerState cu(5, 0.0, 3.0), q(5, 0.0, 3.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::size_t> avail;
    for (std::size_t n = 0; n < 5; ++n) {
      if (u(rng) < 0.7) avail.push_back(n);
    }
    if (avail.empty()) continue;
    const std::size_t a = cu_ucb_select(cu, avail, profiles);
    const std::size_t b = baseline_select(Policy::kAsQOnly, q, avail, profiles, rng).at(0);
    REQUIRE(a == b);
    const double om = u(rng);
    cu.record_outcome(a, om, profiles[a].dataset_size);
    q.record_outcome(b, om, profiles[b].dataset_size);
  }
}

TEST_CASE("record_outcome bookkeeping") {
  const auto profiles = profiles_with_sizes({80, 90, 100});
  SchedulerState s(3, 10.0, 80.0);
  for (int i = 0; i < 3; ++i) s.record_outcome(1, 0.5, 90);
  CHECK(s.count(1) == 3);
  s.record_outcome(1, 0.5, 90);
  CHECK(s.count(1) == 4);
  CHECK(s.count(0) == 0);
  CHECK(s.count(2) == 0);

  SchedulerState m(2, 1.0, 1.0);
  m.record_outcome(0, 0.2, 80);
  m.record_outcome(0, 0.4, 80);
  CHECK(m.mean_cost(0) == doctest::Approx(0.3));
  CHECK(m.mean_cost(1) == 0.0);

  std::mt19937_64 rng(3);
  SchedulerState r(3, 1.0, 50.0);
  for (int t = 0; t < 250; ++t) {
    const std::size_t n = rng() % 3;
    r.record_outcome(n, 0.1, profiles[n].dataset_size);
    for (std::size_t k = 0; k < 3; ++k) CHECK(r.queue(k) >= 0.0);
  }
  CHECK(r.round() == 250);
  CHECK(r.count(0) + r.count(1) + r.count(2) == 250);
}

TEST_CASE("baselines") {
  const auto profiles = profiles_with_sizes({100, 50});
  SchedulerState s(2, 1.0, 1.0);
  // Q = (1, 1) after an idle round: Q*D = (100, 50).
  s.record_idle_round();
  std::mt19937_64 rng(0);
  CHECK(baseline_select(Policy::kAsQOnly, s, all_ids(2), profiles, rng) == std::vector<std::size_t>{0});

  const auto three = profiles_with_sizes({80, 80, 80});
  SchedulerState f(3, 1.0, 1.0);
  for (int i = 0; i < 3; ++i) f.record_outcome(0, 0.1, 80);
  f.record_outcome(1, 0.1, 80);
  for (int i = 0; i < 2; ++i) f.record_outcome(2, 0.1, 80);
  CHECK(baseline_select(Policy::kAsFairness, f, all_ids(3), three, rng) == std::vector<std::size_t>{1});

  const auto many = profiles_with_sizes(std::vector<int>(10, 80));
  SchedulerState z(10, 1.0, 1.0);
  std::mt19937_64 r1(77), r2(77);
  for (int i = 0; i < 50; ++i) {
    CHECK(baseline_select(Policy::kRandom, z, all_ids(10), many, r1) ==
          baseline_select(Policy::kRandom, z, all_ids(10), many, r2));
  }

  SchedulerState sy(10, 1.0, 1.0);
  sy.record_outcome(3, 0.1, 80);
  sy.record_outcome(4, 0.1, 80);
  const auto pick = baseline_select(Policy::kSyFairness, sy, all_ids(10), many, rng, 8);
  CHECK(pick.size() == 8);
  CHECK(std::find(pick.begin(), pick.end(), 3) == pick.end());
  CHECK(std::find(pick.begin(), pick.end(), 4) == pick.end());
}

TEST_CASE("drift plus penalty") {
  const auto profiles = profiles_with_sizes({30, 80});
  SchedulerState s(2, 100.0, 1.0);
  s.record_idle_round();  // Q = (1, 1)
  const std::vector<double> omega = {0.5, 0.9};
  CHECK(drift_plus_penalty(s, omega, std::vector<std::size_t>{0}, profiles) == doctest::Approx(20.0));
  SchedulerState v0(2, 0.0, 1.0);
  v0.record_idle_round();
  CHECK(drift_plus_penalty(v0, omega, std::vector<std::size_t>{1}, profiles) == doctest::Approx(-80.0));
  try {
    drift_plus_penalty(s, omega, std::vector<std::size_t>{}, profiles);
    FAIL("expected C3 error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConstraintC3);
  }
}
