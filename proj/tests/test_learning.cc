#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "edgefl/error.hpp"
#include "edgefl/learning.hpp"

using namespace edgefl;
using namespace edgefl::fl;

namespace {

// f(w) = (k/2) ||w - b||^2
class Quadratic final : public Objective {
 public:
  Quadratic(std::vector<double> b, double k) : b_(std::move(b)), k_(k) {}
  std::size_t dimension() const override { return b_.size(); }
  double loss(std::span<const double> w) const override {
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += (w[i] - b_[i]) * (w[i] - b_[i]);
    return 0.5 * k_ * s;
  }
  void gradient(std::span<const double> w, std::span<double> out) const override {
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = k_ * (w[i] - b_[i]);
  }

 private:
  std::vector<double> b_;
  double k_;
};

TaskSpec small_task() {
  TaskSpec t;
  t.num_classes = 4;
  t.feature_dim = 5;
  t.samples_per_class = 40;
  t.test_samples_per_class = 10;
  return t;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("staleness weight") {
  CHECK(staleness_weight(0.6, 9, 9, 0.5) == 0.6);
  CHECK(staleness_weight(0.6, 9, 9, 3.0) == 0.6);
  CHECK(staleness_weight(0.6, 13, 10, 0.5) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(staleness_weight(0.6, 15, 10, 1.0) < staleness_weight(0.6, 12, 10, 1.0));
  CHECK(staleness_weight(1.0, 4, 4, 0.5) == 1.0);
  CHECK_THROWS_AS(staleness_weight(0.6, 3, 4, 0.5), Error);
  CHECK_THROWS_AS(staleness_weight(0.0, 4, 4, 0.5), Error);
  CHECK_THROWS_AS(staleness_weight(0.6, 4, 4, 0.0), Error);
}

TEST_CASE("aggregate") {
  ModelVector g{{0.0, 0.0, 0.0}, 3};
  ModelVector l{{1.0, 1.0, 1.0}, 1};
  const ModelVector a = aggregate(g, l, 0.25, 4);
  CHECK(a.version == 4);
  for (double x : a.weights) CHECK(x == 0.25);

  ModelVector same{{0.3, -2.0}, 1};
  const ModelVector fixed = aggregate(same, same, 0.7, 2);
  CHECK(fixed.weights[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(fixed.weights[1] == doctest::Approx(-2.0).epsilon(1e-15));

  ModelVector g2{{1.0, 5.0}, 0}, l2{{-3.0, 2.0}, 0};
  const ModelVector tiny = aggregate(g2, l2, 1e-12, 1);
  CHECK(tiny.weights[0] == doctest::Approx(1.0));
  CHECK(tiny.weights[1] == doctest::Approx(5.0));

  CHECK_THROWS_AS(aggregate(g, ModelVector{{1.0}, 0}, 0.5, 1), Error);
  CHECK_THROWS_AS(aggregate(g, l, 0.0, 1), Error);
  CHECK_THROWS_AS(aggregate(g, l, 1.0, 1), Error);
}

TEST_CASE("proximal descent on a quadratic matches the hand-derived steps") {
  const std::vector<double> b = {1.0, -2.0, 0.5};
  const Quadratic f(b, 3.0);
  const ModelVector anchor{{0.2, 0.4, -0.1}, 5};
  const double eta = 0.05, m = 0.7;

  const ModelVector one = proximal_descent(f, anchor, 1, eta, m);
  for (std::size_t i = 0; i < b.size(); ++i) {
    // First step: the prox term vanishes at the anchor.
    CHECK(one.weights[i] == doctest::Approx(anchor.weights[i] - eta * 3.0 * (anchor.weights[i] - b[i])).epsilon(1e-14));
  }
  const ModelVector two = proximal_descent(f, anchor, 2, eta, m);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double w1 = one.weights[i];
    const double w2 = w1 - eta * (3.0 * (w1 - b[i]) + m * (w1 - anchor.weights[i]));
    CHECK(two.weights[i] == doctest::Approx(w2).epsilon(1e-14));
  }
  CHECK(two.version == anchor.version);
}

TEST_CASE("softmax regression gradient matches finite differences") {
  Rng rng(4);
  const TaskSpec spec = small_task();
  const SyntheticTask task = make_synthetic_task(spec, rng);
  const SoftmaxRegression f(task.pool, spec.num_classes);
  REQUIRE(f.dimension() == spec.model_dimension());
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> w(f.dimension()), anchor(f.dimension()), g(f.dimension());
    for (double& x : w) x = nd(rng);
    for (double& x : anchor) x = nd(rng);
    proximal_gradient(f, w, anchor, 0.3, g);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double h = 1e-5;
      std::vector<double> wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const double fd = (proximal_loss(f, wp, anchor, 0.3) - proximal_loss(f, wm, anchor, 0.3)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(std::abs(g[i]), 1e-3));
    }
  }
}

TEST_CASE("local training moves less under a stronger proximal term") {
  Rng rng(6);
  TaskSpec spec = small_task();
  const SyntheticTask task = make_synthetic_task(spec, rng);
  const ModelVector start = zero_model(spec);
  double prev = std::numeric_limits<double>::infinity();
  for (double m : {0.0, 1.0, 10.0, 100.0}) {
    spec.prox_m = m;
    spec.learning_rate = 0.005;  // stable for every m here
    spec.local_steps = 20;
    const ModelVector out = local_train(start, task.pool, spec);
    const double moved = distance(out.weights, start.weights);
    CHECK(moved < prev);
    prev = moved;
  }
  CHECK_THROWS_AS(local_train(start, LabeledData{spec.feature_dim, {}, {}}, spec), Error);
}

TEST_CASE("training reduces loss on the synthetic task") {
  Rng rng(8);
  const TaskSpec spec;
  const SyntheticTask task = make_synthetic_task(spec, rng);
  CHECK(task.pool.size() == spec.num_classes * spec.samples_per_class);
  CHECK(task.test.size() == spec.num_classes * spec.test_samples_per_class);
  ModelVector w = zero_model(spec);
  const Evaluation before = evaluate(w, task.test, spec.num_classes);
  CHECK(before.loss == doctest::Approx(std::log(10.0)));
  for (int i = 0; i < 10; ++i) w = local_train(w, task.pool, spec);
  const Evaluation after = evaluate(w, task.test, spec.num_classes);
  CHECK(after.loss < before.loss);
  CHECK(after.accuracy > 0.3);
}

TEST_CASE("dirichlet draws") {
  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    const auto q = sample_dirichlet(1e6, 10, rng);
    CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double x : q) CHECK(std::abs(x - 0.1) <= 0.005);
  }
  double top = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto q = sample_dirichlet(0.01, 10, rng);
    CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    top += *std::max_element(q.begin(), q.end());
  }
  CHECK(top / 1000.0 >= 0.9);
  CHECK_THROWS_AS(sample_dirichlet(0.0, 10, rng), Error);
}

TEST_CASE("dirichlet partition") {
  Rng rng(12);
  const TaskSpec spec;
  const SyntheticTask task = make_synthetic_task(spec, rng);
  std::vector<int> sizes;
  for (int i = 0; i < 30; ++i) sizes.push_back(70 + i);

  const Partition iid = partition_dirichlet(task.pool, 10, sizes, 1e6, rng);
  REQUIRE(iid.shards.size() == sizes.size());
  std::size_t total = 0;
  for (std::size_t n = 0; n < sizes.size(); ++n) {
    CHECK(iid.shards[n].size() == static_cast<std::size_t>(sizes[n]));
    total += iid.shards[n].size();
    std::vector<int> hist(10, 0);
    for (int y : iid.shards[n].labels) ++hist[y];
    for (int c = 0; c < 10; ++c) {
      CHECK(std::abs(iid.proportions[n][c] - 0.1) <= 0.005);
      CHECK(std::abs(hist[c] - 0.1 * sizes[n]) <= 1.0);
    }
  }
  CHECK(total == static_cast<std::size_t>(std::accumulate(sizes.begin(), sizes.end(), 0)));

  const Partition skew = partition_dirichlet(task.pool, 10, sizes, 0.01, rng);
  double top_share = 0.0;
  for (std::size_t n = 0; n < sizes.size(); ++n) {
    CHECK(skew.shards[n].size() == static_cast<std::size_t>(sizes[n]));
    std::vector<int> hist(10, 0);
    for (int y : skew.shards[n].labels) ++hist[y];
    top_share += static_cast<double>(*std::max_element(hist.begin(), hist.end())) / sizes[n];
  }
  CHECK(top_share / sizes.size() >= 0.8);
}
