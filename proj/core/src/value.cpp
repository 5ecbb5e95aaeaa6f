#include "rsf/value.hpp"

#include <algorithm>
#include <cmath>

#include "rsf/error.hpp"

namespace rsf {

double mc_cost_to_go(const MasModel& model, const Policy& policy, const JointState& x,
                     std::size_t horizon, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ContractError("Monte-Carlo estimate needs at least one sample");
  model.check_state(x);
  double total = 0.0;
  JointState state = x;
  JointState next = model.zero_state();
  JointAction u;
  for (std::size_t r = 0; r < samples; ++r) {
    Rng rng = make_rng(derive_seed(seed, {r}));
    UncertaintySample sample = sample_uncertainty(model, rng);
    state = x;
    double discount = 1.0;
    double sum = 0.0;
    for (std::size_t k = 1; k <= horizon; ++k) {
      if (k > 1) resample_noise(model, rng, sample);
      eval_policy_into(policy, state, u);
      step_into(model, state, u, sample, next);
      std::swap(state, next);
      discount *= model.gamma;
      sum += discount * cost(model, state);
    }
    total += sum;
  }
  return total / static_cast<double>(samples);
}

StateSampler uniform_box_sampler(const MasModel& model, double pos_lo, double pos_hi, double vel_lo,
                                 double vel_hi) {
  if (!(pos_lo <= pos_hi) || !(vel_lo <= vel_hi)) throw ContractError("sampler box bounds are inverted");
  const std::size_t agents = model.agents;
  const std::size_t dim = model.state_dim;
  return [=](Rng& rng) {
    std::uniform_real_distribution<double> pos(pos_lo, pos_hi);
    std::uniform_real_distribution<double> vel(vel_lo, vel_hi);
    JointState x(agents, dim);
    for (std::size_t i = 0; i < agents; ++i) {
      x(i, 0) = pos(rng);
      for (std::size_t k = 1; k < dim; ++k) x(i, k) = vel(rng);
    }
    return x;
  };
}

ValueDataset collect_dataset(const MasModel& model, const Policy& safe_policy, std::size_t n_states,
                             std::size_t horizon, std::size_t samples, std::uint64_t seed,
                             const StateSampler& sampler) {
  if (n_states == 0) throw ContractError("dataset needs at least one state");
  ValueDataset data;
  data.states.reserve(n_states);
  data.targets.reserve(n_states);
  for (std::size_t r = 0; r < n_states; ++r) {
    const std::uint64_t row_seed = seed + r;
    Rng rng = make_rng(derive_seed(row_seed, {0}));
    JointState x = sampler(rng);
    model.check_state(x);
    data.targets.push_back(mc_cost_to_go(model, safe_policy, x, horizon, samples, derive_seed(row_seed, {1})));
    data.states.push_back(std::move(x));
  }
  return data;
}

ValueModel::ValueModel(std::vector<DenseLayer> layers, Normalization norm, Metadata meta)
    : layers_(std::move(layers)), norm_(std::move(norm)), meta_(meta) {
  if (layers_.empty()) throw ContractError("value model needs at least one layer");
  if (layers_.back().weights.rows() != 1) throw ContractError("value model output must be scalar");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].weights.rows()) throw ContractError("layer bias size mismatch");
    if (l > 0 && layers_[l].weights.cols() != layers_[l - 1].weights.rows()) {
      throw ContractError("consecutive layer sizes do not chain");
    }
  }
  if (norm_.input_mean.size() != layers_.front().weights.cols() ||
      norm_.input_scale.size() != layers_.front().weights.cols()) {
    throw ContractError("normalization size does not match input layer");
  }
}

std::size_t ValueModel::input_dim() const noexcept {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.cols());
}

std::vector<std::size_t> ValueModel::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (layers_.empty()) return sizes;
  sizes.push_back(input_dim());
  for (const auto& layer : layers_) sizes.push_back(static_cast<std::size_t>(layer.weights.rows()));
  return sizes;
}

double ValueModel::evaluate(const JointState& x) const { return evaluate(x.flat()); }

double ValueModel::evaluate(std::span<const double> flat) const {
  if (flat.size() != input_dim()) {
    throw ContractError("value model expects input dimension " + std::to_string(input_dim()) + ", got " +
                        std::to_string(flat.size()));
  }
  thread_local Eigen::VectorXd activation;
  thread_local Eigen::VectorXd pre;
  const Eigen::Map<const Eigen::VectorXd> input(flat.data(), static_cast<Eigen::Index>(flat.size()));
  activation = (input - norm_.input_mean).cwiseQuotient(norm_.input_scale);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    pre.noalias() = layers_[l].weights * activation;
    pre += layers_[l].bias;
    if (l + 1 < layers_.size()) {
      activation = pre.array().tanh();
    }
  }
  const double out = pre(0) * norm_.target_scale + norm_.target_mean;
  return std::max(0.0, out);
}

bool ValueModel::operator==(const ValueModel& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weights.rows() != other.layers_[l].weights.rows() ||
        layers_[l].weights.cols() != other.layers_[l].weights.cols() ||
        layers_[l].weights != other.layers_[l].weights || layers_[l].bias != other.layers_[l].bias) {
      return false;
    }
  }
  return norm_.input_mean == other.norm_.input_mean && norm_.input_scale == other.norm_.input_scale &&
         norm_.target_mean == other.norm_.target_mean && norm_.target_scale == other.norm_.target_scale &&
         meta_.gamma == other.meta_.gamma && meta_.horizon == other.meta_.horizon &&
         meta_.train_seed == other.meta_.train_seed && meta_.train_mse == other.meta_.train_mse;
}

namespace {

struct AdamSlot {
  Eigen::MatrixXd m_w, v_w;
  Eigen::VectorXd m_b, v_b;
};

}  // namespace

ValueModel fit_value(const ValueDataset& dataset, const ApproxConfig& config, std::uint64_t seed,
                     double gamma, std::uint64_t horizon) {
  if (dataset.states.empty()) throw ContractError("cannot fit a value model to an empty dataset");
  if (dataset.targets.size() != dataset.states.size()) throw ContractError("dataset states/targets size mismatch");
  const auto n = static_cast<Eigen::Index>(dataset.size());
  const auto d = static_cast<Eigen::Index>(dataset.states.front().size());
  if (d == 0) throw ContractError("dataset states are empty");

  Eigen::MatrixXd inputs(d, n);
  Eigen::RowVectorXd targets(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& x = dataset.states[static_cast<std::size_t>(j)];
    if (static_cast<Eigen::Index>(x.size()) != d) throw ContractError("dataset states differ in dimension");
    for (Eigen::Index k = 0; k < d; ++k) inputs(k, j) = x.flat()[static_cast<std::size_t>(k)];
    targets(j) = dataset.targets[static_cast<std::size_t>(j)];
    if (!std::isfinite(targets(j))) throw ContractError("dataset contains a non-finite target");
  }

  ValueModel::Normalization norm;
  norm.input_mean = inputs.rowwise().mean();
  norm.input_scale.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double var = (inputs.row(k).array() - norm.input_mean(k)).square().mean();
    norm.input_scale(k) = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  norm.target_mean = targets.mean();
  const double target_var = (targets.array() - norm.target_mean).square().mean();
  norm.target_scale = target_var > 1e-24 ? std::sqrt(target_var) : 1.0;

  const Eigen::MatrixXd x0 =
      (inputs.colwise() - norm.input_mean).array().colwise() / norm.input_scale.array();
  const Eigen::RowVectorXd y = (targets.array() - norm.target_mean) / norm.target_scale;

  std::vector<Eigen::Index> sizes{d};
  for (std::size_t h : config.hidden) sizes.push_back(static_cast<Eigen::Index>(h));
  sizes.push_back(1);

  Rng rng = make_rng(seed);
  std::vector<DenseLayer> layers(sizes.size() - 1);
  std::vector<AdamSlot> adam(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Eigen::Index fan_in = sizes[l];
    const Eigen::Index fan_out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> init(-limit, limit);
    layers[l].weights.resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r)
      for (Eigen::Index c = 0; c < fan_in; ++c) layers[l].weights(r, c) = init(rng);
    layers[l].bias = Eigen::VectorXd::Zero(fan_out);
    adam[l].m_w = Eigen::MatrixXd::Zero(fan_out, fan_in);
    adam[l].v_w = Eigen::MatrixXd::Zero(fan_out, fan_in);
    adam[l].m_b = Eigen::VectorXd::Zero(fan_out);
    adam[l].v_b = Eigen::VectorXd::Zero(fan_out);
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<Eigen::MatrixXd> acts(layers.size() + 1);
  acts[0] = x0;
  Eigen::MatrixXd delta;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  auto forward = [&]() {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      Eigen::MatrixXd z = layers[l].weights * acts[l];
      z.colwise() += layers[l].bias;
      acts[l + 1] = (l + 1 < layers.size()) ? Eigen::MatrixXd(z.array().tanh()) : z;
    }
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    forward();
    delta = 2.0 * inv_n * (acts.back() - y);
    beta1_pow *= kBeta1;
    beta2_pow *= kBeta2;
    for (std::size_t li = layers.size(); li-- > 0;) {
      const Eigen::MatrixXd grad_w = delta * acts[li].transpose();
      const Eigen::VectorXd grad_b = delta.rowwise().sum();
      if (li > 0) {
        Eigen::MatrixXd back = layers[li].weights.transpose() * delta;
        delta = back.array() * (1.0 - acts[li].array().square());
      }
      AdamSlot& s = adam[li];
      s.m_w = kBeta1 * s.m_w + (1.0 - kBeta1) * grad_w;
      s.v_w = kBeta2 * s.v_w + (1.0 - kBeta2) * grad_w.cwiseAbs2();
      s.m_b = kBeta1 * s.m_b + (1.0 - kBeta1) * grad_b;
      s.v_b = kBeta2 * s.v_b + (1.0 - kBeta2) * grad_b.cwiseAbs2();
      const double step = config.learning_rate * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
      layers[li].weights.array() -= step * s.m_w.array() / (s.v_w.array().sqrt() + kEps);
      layers[li].bias.array() -= step * s.m_b.array() / (s.v_b.array().sqrt() + kEps);
    }
  }

  ValueModel::Metadata meta;
  meta.gamma = gamma;
  meta.horizon = horizon;
  meta.train_seed = seed;
  ValueModel fitted(std::move(layers), std::move(norm), meta);

  double sse = 0.0;
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    const double e = fitted.evaluate(dataset.states[j]) - dataset.targets[j];
    sse += e * e;
  }
  meta.train_mse = sse * inv_n;
  return ValueModel(fitted.layers(), fitted.normalization(), meta);
}

double eval_value(const ValueModel& model, const JointState& x) { return model.evaluate(x); }

double barrier_value(const Barrier& barrier, const JointState& x) { return barrier(x); }

}  // namespace rsf
