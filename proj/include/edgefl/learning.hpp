#pragma once

// Desk-scale learning task for the federated engine: multinomial logistic
// regression on a synthetic Gaussian mixture, proximal local training,
// staleness-weighted asynchronous aggregation and Dirichlet label skew.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edgefl/system_model.hpp"

namespace edgefl::fl {

struct ModelVector {
  std::vector<double> weights;
  std::uint64_t version = 0;  // global round that produced these weights
};

struct TaskSpec {
  std::size_t num_classes = 10;
  std::size_t feature_dim = 32;
  std::size_t samples_per_class = 500;
  std::size_t test_samples_per_class = 100;
  double class_separation = 0.35;  // std-dev of class-mean coordinates
  double dirichlet_gamma = 1e6;
  int local_steps = 5;
  double learning_rate = 0.1;
  double prox_m = 0.01;
  double rho = 0.6;
  double staleness_exponent = 0.5;

  std::size_t model_dimension() const { return num_classes * (feature_dim + 1); }
  void validate() const;
};

struct LabeledData {
  std::size_t feature_dim = 0;
  std::vector<double> features;  // row-major, size() x feature_dim
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * feature_dim, feature_dim);
  }
  void push_back(std::span<const double> x, int label);
};

// Differentiable loss over a flat parameter vector.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  virtual double loss(std::span<const double> w) const = 0;
  virtual void gradient(std::span<const double> w, std::span<double> out) const = 0;
};

// Mean cross-entropy of a K-class linear softmax model with bias. Parameters
// are laid out class-major: [w_k (feature_dim), b_k] for k = 0..K-1.
class SoftmaxRegression final : public Objective {
 public:
  SoftmaxRegression(const LabeledData& data, std::size_t num_classes);
  std::size_t dimension() const override { return classes_ * (data_->feature_dim + 1); }
  double loss(std::span<const double> w) const override;
  void gradient(std::span<const double> w, std::span<double> out) const override;
  double accuracy(std::span<const double> w) const;

 private:
  void logits(std::span<const double> w, std::span<const double> x, std::span<double> out) const;

  const LabeledData* data_;
  std::size_t classes_;
};

// L(w) + (m/2) * ||w - anchor||^2
double proximal_loss(const Objective& f, std::span<const double> w, std::span<const double> anchor, double m);
void proximal_gradient(const Objective& f, std::span<const double> w, std::span<const double> anchor, double m,
                       std::span<double> out);

// Full-batch gradient descent on the proximal objective, starting from the anchor.
ModelVector proximal_descent(const Objective& f, const ModelVector& anchor, int steps, double learning_rate,
                             double m);

ModelVector local_train(const ModelVector& model, const LabeledData& shard, const TaskSpec& spec);

// rho * s(t - tau) with s(lag) = (lag + 1)^(-a): s(0) = 1, strictly decreasing.
double staleness_weight(double rho, std::uint64_t t, std::uint64_t tau, double a);

// (1 - rho_t) * global + rho_t * local, stamped with `version`.
ModelVector aggregate(const ModelVector& global, const ModelVector& local, double rho_t, std::uint64_t version);

ModelVector zero_model(const TaskSpec& spec);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};
Evaluation evaluate(const ModelVector& model, const LabeledData& data, std::size_t num_classes);

struct SyntheticTask {
  std::vector<std::vector<double>> class_means;
  LabeledData pool;  // samples_per_class per class, grouped by class
  LabeledData test;
};
SyntheticTask make_synthetic_task(const TaskSpec& spec, Rng& rng);

// One draw from Dir(gamma * 1_k). Sampled in log space so that tiny gamma
// does not underflow every component to zero.
std::vector<double> sample_dirichlet(double gamma, std::size_t k, Rng& rng);

struct Partition {
  std::vector<LabeledData> shards;
  std::vector<std::vector<double>> proportions;  // drawn class mix per device
};

// Gives device n exactly sizes[n] samples whose class mix follows a Dirichlet
// draw. Each class pool is consumed in shuffled order and wraps around when a
// class is oversubscribed.
Partition partition_dirichlet(const LabeledData& pool, std::size_t num_classes, std::span<const int> sizes,
                              double gamma, Rng& rng);

}  // namespace edgefl::fl
