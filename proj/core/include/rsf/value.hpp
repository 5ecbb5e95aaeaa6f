#pragma once

// Monte-Carlo value estimation, a small tanh network fitted to rollout targets,
// and the value-defined barrier h(x) = xi - V(x).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rsf/dynamics.hpp"
#include "rsf/policy.hpp"

namespace rsf {

class ValueFunction {
 public:
  virtual ~ValueFunction() = default;
  virtual double evaluate(const JointState& x) const = 0;
};

class ConstantValue final : public ValueFunction {
 public:
  explicit ConstantValue(double value) : value_(value) {}
  double evaluate(const JointState&) const override { return value_; }

 private:
  double value_;
};

/// sum_{k=1..H} gamma^k c(x_k), averaged over `samples` closed-loop rollouts from x,
/// each with its own (theta, omega) stream derived from `seed`.
double mc_cost_to_go(const MasModel& model, const Policy& policy, const JointState& x,
                     std::size_t horizon, std::size_t samples, std::uint64_t seed);

struct ValueDataset {
  std::vector<JointState> states;
  std::vector<double> targets;

  std::size_t size() const noexcept { return states.size(); }
};

using StateSampler = std::function<JointState(Rng&)>;

/// Positions (first state component) uniform in [pos_lo, pos_hi], remaining
/// components uniform in [vel_lo, vel_hi], independently per agent.
StateSampler uniform_box_sampler(const MasModel& model, double pos_lo, double pos_hi, double vel_lo,
                                 double vel_hi);

/// Row r uses seed + r, so rows are independent of each other and of n_states.
ValueDataset collect_dataset(const MasModel& model, const Policy& safe_policy, std::size_t n_states,
                             std::size_t horizon, std::size_t samples, std::uint64_t seed,
                             const StateSampler& sampler);

struct ApproxConfig {
  std::vector<std::size_t> hidden{64, 64};
  std::size_t epochs = 2000;
  double learning_rate = 5e-3;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
};

/// Fully connected tanh network with input and target standardization.
/// Predictions are clamped at zero.
class ValueModel final : public ValueFunction {
 public:
  struct Normalization {
    Eigen::VectorXd input_mean;
    Eigen::VectorXd input_scale;
    double target_mean = 0.0;
    double target_scale = 1.0;
  };

  struct Metadata {
    double gamma = 0.99;
    std::uint64_t horizon = 0;
    std::uint64_t train_seed = 0;
    double train_mse = 0.0;
  };

  ValueModel() = default;
  ValueModel(std::vector<DenseLayer> layers, Normalization norm, Metadata meta);

  double evaluate(const JointState& x) const override;
  double evaluate(std::span<const double> flat) const;

  std::size_t input_dim() const noexcept;
  std::vector<std::size_t> layer_sizes() const;
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  const Normalization& normalization() const noexcept { return norm_; }
  const Metadata& metadata() const noexcept { return meta_; }
  double train_mse() const noexcept { return meta_.train_mse; }

  bool operator==(const ValueModel& other) const;

 private:
  std::vector<DenseLayer> layers_;
  Normalization norm_;
  Metadata meta_;
};

/// Full-batch Adam on the mean squared error for a fixed number of epochs.
ValueModel fit_value(const ValueDataset& dataset, const ApproxConfig& config, std::uint64_t seed,
                     double gamma = 0.99, std::uint64_t horizon = 0);

double eval_value(const ValueModel& model, const JointState& x);

struct Barrier {
  std::shared_ptr<const ValueFunction> value;
  double xi = 0.0;

  double operator()(const JointState& x) const { return xi - value->evaluate(x); }
  bool contains(const JointState& x) const { return value->evaluate(x) <= xi; }
};

double barrier_value(const Barrier& barrier, const JointState& x);

}  // namespace rsf
