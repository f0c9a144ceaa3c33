#include "edgefl/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "edgefl/error.hpp"

namespace edgefl::fl {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kConfig, what);
}

}  // namespace

void TaskSpec::validate() const {
  require(num_classes >= 2, "task: num_classes must be >= 2");
  require(feature_dim >= 1, "task: feature_dim must be >= 1");
  require(samples_per_class >= 1, "task: samples_per_class must be >= 1");
  require(dirichlet_gamma > 0.0, "task: dirichlet_gamma must be > 0");
  require(local_steps >= 1, "task: local_steps must be >= 1");
  require(learning_rate > 0.0, "task: learning_rate must be > 0");
  require(prox_m >= 0.0, "task: prox_m must be >= 0");
  require(rho > 0.0 && rho < 1.0, "task: rho must lie in (0, 1)");
  require(staleness_exponent > 0.0, "task: staleness_exponent must be > 0");
}

void LabeledData::push_back(std::span<const double> x, int label) {
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

SoftmaxRegression::SoftmaxRegression(const LabeledData& data, std::size_t num_classes)
    : data_(&data), classes_(num_classes) {}

void SoftmaxRegression::logits(std::span<const double> w, std::span<const double> x,
                               std::span<double> out) const {
  const std::size_t stride = data_->feature_dim + 1;
  for (std::size_t k = 0; k < classes_; ++k) {
    const double* wk = w.data() + k * stride;
    double z = wk[data_->feature_dim];
    for (std::size_t j = 0; j < data_->feature_dim; ++j) z += wk[j] * x[j];
    out[k] = z;
  }
}

double SoftmaxRegression::loss(std::span<const double> w) const {
  std::vector<double> z(classes_);
  double total = 0.0;
  for (std::size_t i = 0; i < data_->size(); ++i) {
    logits(w, data_->row(i), z);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    total += zmax + std::log(sum) - z[static_cast<std::size_t>(data_->labels[i])];
  }
  return data_->size() ? total / static_cast<double>(data_->size()) : 0.0;
}

void SoftmaxRegression::gradient(std::span<const double> w, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (data_->size() == 0) return;
  const std::size_t d = data_->feature_dim;
  const std::size_t stride = d + 1;
  const double inv_n = 1.0 / static_cast<double>(data_->size());
  std::vector<double> z(classes_);
  for (std::size_t i = 0; i < data_->size(); ++i) {
    const auto x = data_->row(i);
    logits(w, x, z);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
      v = std::exp(v - zmax);
      sum += v;
    }
    for (std::size_t k = 0; k < classes_; ++k) {
      double r = z[k] / sum;
      if (static_cast<int>(k) == data_->labels[i]) r -= 1.0;
      r *= inv_n;
      double* gk = out.data() + k * stride;
      for (std::size_t j = 0; j < d; ++j) gk[j] += r * x[j];
      gk[d] += r;
    }
  }
}

double SoftmaxRegression::accuracy(std::span<const double> w) const {
  if (data_->size() == 0) return 0.0;
  std::vector<double> z(classes_);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data_->size(); ++i) {
    logits(w, data_->row(i), z);
    const auto best = std::max_element(z.begin(), z.end()) - z.begin();
    if (best == data_->labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data_->size());
}

double proximal_loss(const Objective& f, std::span<const double> w, std::span<const double> anchor, double m) {
  double sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) sq += (w[i] - anchor[i]) * (w[i] - anchor[i]);
  return f.loss(w) + 0.5 * m * sq;
}

void proximal_gradient(const Objective& f, std::span<const double> w, std::span<const double> anchor, double m,
                       std::span<double> out) {
  f.gradient(w, out);
  for (std::size_t i = 0; i < w.size(); ++i) out[i] += m * (w[i] - anchor[i]);
}

ModelVector proximal_descent(const Objective& f, const ModelVector& anchor, int steps, double learning_rate,
                             double m) {
  if (anchor.weights.size() != f.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "proximal_descent: model and objective dimensions differ");
  }
  ModelVector out = anchor;
  std::vector<double> grad(anchor.weights.size());
  for (int s = 0; s < steps; ++s) {
    proximal_gradient(f, out.weights, anchor.weights, m, grad);
    for (std::size_t i = 0; i < grad.size(); ++i) out.weights[i] -= learning_rate * grad[i];
  }
  return out;
}

ModelVector local_train(const ModelVector& model, const LabeledData& shard, const TaskSpec& spec) {
  if (shard.size() == 0) throw Error(ErrorCode::kDomain, "local_train: empty shard");
  const SoftmaxRegression f(shard, spec.num_classes);
  return proximal_descent(f, model, spec.local_steps, spec.learning_rate, spec.prox_m);
}

double staleness_weight(double rho, std::uint64_t t, std::uint64_t tau, double a) {
  if (t < tau) throw Error(ErrorCode::kDomain, "staleness_weight: t < tau");
  if (!(rho > 0.0 && rho <= 1.0) || !(a > 0.0)) {
    throw Error(ErrorCode::kDomain, "staleness_weight: need rho in (0, 1] and a > 0");
  }
  return rho * std::pow(static_cast<double>(t - tau) + 1.0, -a);
}

ModelVector aggregate(const ModelVector& global, const ModelVector& local, double rho_t, std::uint64_t version) {
  if (global.weights.size() != local.weights.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "aggregate: model dimensions differ");
  }
  if (!(rho_t > 0.0 && rho_t < 1.0)) throw Error(ErrorCode::kDomain, "aggregate: rho_t must lie in (0, 1)");
  ModelVector out;
  out.version = version;
  out.weights.resize(global.weights.size());
  for (std::size_t i = 0; i < out.weights.size(); ++i) {
    out.weights[i] = (1.0 - rho_t) * global.weights[i] + rho_t * local.weights[i];
  }
  return out;
}

ModelVector zero_model(const TaskSpec& spec) { return {std::vector<double>(spec.model_dimension(), 0.0), 0}; }

Evaluation evaluate(const ModelVector& model, const LabeledData& data, std::size_t num_classes) {
  const SoftmaxRegression f(data, num_classes);
  return {f.loss(model.weights), f.accuracy(model.weights)};
}

SyntheticTask make_synthetic_task(const TaskSpec& spec, Rng& rng) {
  spec.validate();
  SyntheticTask task;
  std::normal_distribution<double> unit(0.0, 1.0);
  task.class_means.assign(spec.num_classes, std::vector<double>(spec.feature_dim));
  for (auto& mean : task.class_means) {
    for (double& v : mean) v = spec.class_separation * unit(rng);
  }
  task.pool.feature_dim = spec.feature_dim;
  task.test.feature_dim = spec.feature_dim;
  std::vector<double> x(spec.feature_dim);
  const auto fill = [&](LabeledData& out, std::size_t per_class) {
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
      for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t j = 0; j < spec.feature_dim; ++j) x[j] = task.class_means[k][j] + unit(rng);
        out.push_back(x, static_cast<int>(k));
      }
    }
  };
  fill(task.pool, spec.samples_per_class);
  fill(task.test, spec.test_samples_per_class);
  return task;
}

std::vector<double> sample_dirichlet(double gamma, std::size_t k, Rng& rng) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kDomain, "sample_dirichlet: gamma must be positive");
  // Gamma(g) = Gamma(g + 1) * U^(1/g), taken in logs.
  std::gamma_distribution<double> shifted(gamma + 1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> logs(k);
  for (double& l : logs) {
    double u = unit(rng);
    while (u <= 0.0) u = unit(rng);
    l = std::log(shifted(rng)) + std::log(u) / gamma;
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double& l : logs) {
    l = std::exp(l - top);
    sum += l;
  }
  for (double& l : logs) l /= sum;
  return logs;
}

Partition partition_dirichlet(const LabeledData& pool, std::size_t num_classes, std::span<const int> sizes,
                              double gamma, Rng& rng) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < pool.size(); ++i) by_class.at(static_cast<std::size_t>(pool.labels[i])).push_back(i);
  for (auto& idx : by_class) {
    if (idx.empty()) throw Error(ErrorCode::kDomain, "partition_dirichlet: a class has no samples in the pool");
    std::shuffle(idx.begin(), idx.end(), rng);
  }
  std::vector<std::size_t> cursor(num_classes, 0);

  Partition out;
  out.shards.reserve(sizes.size());
  out.proportions.reserve(sizes.size());
  for (int size : sizes) {
    std::vector<double> q = sample_dirichlet(gamma, num_classes, rng);
    // largest-remainder rounding so counts sum exactly to `size`
    std::vector<std::size_t> counts(num_classes);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      const double exact = q[k] * size;
      counts[k] = static_cast<std::size_t>(std::floor(exact));
      assigned += counts[k];
      remainders.emplace_back(exact - std::floor(exact), k);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < static_cast<std::size_t>(size); ++r, ++assigned) {
      ++counts[remainders[r % num_classes].second];
    }

    LabeledData shard;
    shard.feature_dim = pool.feature_dim;
    for (std::size_t k = 0; k < num_classes; ++k) {
      for (std::size_t c = 0; c < counts[k]; ++c) {
        const std::size_t idx = by_class[k][cursor[k] % by_class[k].size()];
        ++cursor[k];
        shard.push_back(pool.row(idx), pool.labels[idx]);
      }
    }
    out.shards.push_back(std::move(shard));
    out.proportions.push_back(std::move(q));
  }
  return out;
}

}  // namespace edgefl::fl
