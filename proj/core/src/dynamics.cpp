#include "rsf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsf/error.hpp"

namespace rsf {

JointState::JointState(std::size_t agents, std::size_t dim)
    : agents_(agents), dim_(dim), values_(agents * dim, 0.0) {}

JointState::JointState(std::size_t agents, std::size_t dim, std::vector<double> values)
    : agents_(agents), dim_(dim), values_(std::move(values)) {
  if (values_.size() != agents_ * dim_) {
    throw ContractError("JointState: expected " + std::to_string(agents_ * dim_) +
                        " values, got " + std::to_string(values_.size()));
  }
}

JointState JointState::from_agents(const std::vector<std::vector<double>>& agents) {
  if (agents.empty()) return {};
  const std::size_t dim = agents.front().size();
  std::vector<double> flat;
  flat.reserve(agents.size() * dim);
  for (const auto& a : agents) {
    if (a.size() != dim) throw ContractError("JointState: agents with differing dimensions");
    flat.insert(flat.end(), a.begin(), a.end());
  }
  return JointState(agents.size(), dim, std::move(flat));
}

bool JointState::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double JointAction::squared_norm() const noexcept {
  double total = 0.0;
  for (const auto& a : agents)
    for (double v : a) total += v * v;
  return total;
}

double JointAction::squared_distance(const JointAction& other) const {
  if (other.agents.size() != agents.size()) throw ContractError("JointAction: agent count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].size() != other.agents[i].size()) {
      throw ContractError("JointAction: action dimension mismatch for agent " + std::to_string(i));
    }
    for (std::size_t k = 0; k < agents[i].size(); ++k) {
      const double d = agents[i][k] - other.agents[i][k];
      total += d * d;
    }
  }
  return total;
}

double ActionBox::clamp(double u) const noexcept { return std::clamp(u, lower, upper); }

std::string_view preset_name(Preset preset) noexcept {
  switch (preset) {
    case Preset::Spring: return "spring";
    case Preset::Collision: return "collision";
    case Preset::Custom: return "custom";
  }
  return "custom";
}

std::optional<Preset> parse_preset(std::string_view name) noexcept {
  if (name == "spring") return Preset::Spring;
  if (name == "collision") return Preset::Collision;
  return std::nullopt;
}

std::size_t MasModel::actuated_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(action_dims.begin(), action_dims.end(), [](std::size_t d) { return d > 0; }));
}

JointAction MasModel::zero_action() const {
  JointAction u;
  u.agents.reserve(agents);
  for (std::size_t d : action_dims) u.agents.emplace_back(d, 0.0);
  return u;
}

void MasModel::check_state(const JointState& x) const {
  if (x.agents() != agents || x.dim() != state_dim) {
    throw ContractError("state shape " + std::to_string(x.agents()) + "x" + std::to_string(x.dim()) +
                        " does not match model " + std::to_string(agents) + "x" +
                        std::to_string(state_dim));
  }
}

void MasModel::check_action(const JointAction& u) const {
  if (u.agents.size() != agents) {
    throw ContractError("action has " + std::to_string(u.agents.size()) + " agents, model has " +
                        std::to_string(agents));
  }
  for (std::size_t i = 0; i < agents; ++i) {
    if (u.agents[i].size() != action_dims[i]) {
      throw ContractError("action dimension mismatch for agent " + std::to_string(i));
    }
  }
}

double sigm10(double z) noexcept { return 1.0 / (1.0 + std::exp(-10.0 * z)); }

double saturate(double z) noexcept { return std::clamp(z, -1.0, 1.0); }

namespace {

constexpr double kSpringDt = 0.1;
constexpr double kSpringBound = 2.0;
constexpr double kCollisionDt = 0.01;
constexpr double kCollisionSeparation = 0.2;

void spring_transition(const JointState& x, const JointAction& u, const UncertaintySample& s,
                       JointState& next) {
  const double theta_sq = s.theta * s.theta;
  const double mass_pos = x(2, 0);
  const double e1 = x(0, 0) - mass_pos;
  const double e2 = x(1, 0) - mass_pos;
  const double g[3] = {5.0 * u.agents[0][0] - 0.5 * theta_sq * e1,
                       5.0 * u.agents[1][0] - 0.5 * theta_sq * e2,
                       0.5 * theta_sq * (e1 + e2)};
  for (std::size_t i = 0; i < 3; ++i) {
    const double pos = x(i, 0);
    const double vel = x(i, 1);
    next(i, 0) = pos + kSpringDt * vel + s.noise[2 * i];
    next(i, 1) = vel + kSpringDt * g[i] - kSpringDt * std::sin(saturate(vel)) + s.noise[2 * i + 1];
  }
}

void collision_transition(const JointState& x, const JointAction& u, const UncertaintySample& s,
                          JointState& next) {
  for (std::size_t i = 0; i < x.agents(); ++i) {
    const double pos = x(i, 0);
    const double vel = x(i, 1);
    next(i, 0) = pos + kCollisionDt * vel + s.theta * std::sin(pos) + s.noise[2 * i];
    next(i, 1) = vel + u.agents[i][0] + s.noise[2 * i + 1];
  }
}

std::vector<bool> spring_agent_safety(const JointState& x) {
  std::vector<bool> out(x.agents());
  for (std::size_t i = 0; i < x.agents(); ++i) out[i] = std::abs(x(i, 0)) <= kSpringBound;
  return out;
}

double spring_cost(const JointState& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.agents(); ++i) {
    const double p = x(i, 0);
    total += sigm10(kSpringBound * kSpringBound - p * p) / 3.0;
  }
  return std::max(0.0, 1.0 - total);
}

std::vector<bool> collision_agent_safety(const JointState& x) {
  std::vector<bool> out(x.agents(), true);
  for (std::size_t i = 0; i < x.agents(); ++i) {
    for (std::size_t j = i + 1; j < x.agents(); ++j) {
      if (std::abs(x(i, 0) - x(j, 0)) < kCollisionSeparation) out[i] = out[j] = false;
    }
  }
  return out;
}

double collision_cost(const JointState& x) {
  const std::size_t m = x.agents();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double d = x(i, 0) - x(j, 0);
      nearest = std::min(nearest, d * d);
    }
    total += sigm10(kCollisionSeparation * kCollisionSeparation - nearest);
  }
  return total / static_cast<double>(m);
}

MasModel make_spring(const ModelParams& params) {
  if (params.agents && *params.agents != 3) {
    throw ConfigError(ConfigErrorKind::Invalid, "spring preset has exactly 3 agents");
  }
  MasModel m;
  m.preset = Preset::Spring;
  m.agents = 3;
  m.state_dim = 2;
  m.noise_dim = 2;
  m.action_dims = {1, 1, 0};
  m.noise_scale = params.noise_scale.value_or(0.01);
  m.gamma = params.gamma.value_or(0.99);
  m.box = params.box.value_or(ActionBox{});
  m.x_ref = {7.0 / 4.0, 0.0};
  m.weight_u = 0.01;
  m.weight_x = {{0.1, 0.0}, {0.1, 0.0}, {1.0, 0.0}};
  m.transition = spring_transition;
  m.agent_safe = spring_agent_safety;
  m.safe = [](const JointState& x) {
    const auto flags = spring_agent_safety(x);
    return std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
  };
  m.cost_fn = spring_cost;
  return m;
}

MasModel make_collision(const ModelParams& params) {
  const std::size_t agents = params.agents.value_or(2);
  if (agents < 2) {
    throw ConfigError(ConfigErrorKind::Invalid, "collision preset requires at least 2 agents");
  }
  MasModel m;
  m.preset = Preset::Collision;
  m.agents = agents;
  m.state_dim = 2;
  m.noise_dim = 2;
  m.action_dims.assign(agents, 1);
  m.noise_scale = params.noise_scale.value_or(0.1);
  m.gamma = params.gamma.value_or(0.99);
  m.box = params.box.value_or(ActionBox{});
  m.x_ref = {0.0, 0.0};
  m.weight_u = 0.1;
  m.weight_x.assign(agents, {1.0, 0.1});
  m.transition = collision_transition;
  m.agent_safe = collision_agent_safety;
  m.safe = [](const JointState& x) {
    const auto flags = collision_agent_safety(x);
    return std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
  };
  m.cost_fn = collision_cost;
  return m;
}

}  // namespace

MasModel make_model(Preset preset, const ModelParams& params) {
  if (params.noise_scale && !(*params.noise_scale >= 0.0)) {
    throw ConfigError(ConfigErrorKind::Invalid, "noise scale must be nonnegative");
  }
  if (params.gamma && !(*params.gamma > 0.0 && *params.gamma < 1.0)) {
    throw ConfigError(ConfigErrorKind::Invalid, "discount factor must lie in (0, 1)");
  }
  if (params.box && !(params.box->lower < params.box->upper)) {
    throw ConfigError(ConfigErrorKind::Invalid, "action box requires lower < upper");
  }
  switch (preset) {
    case Preset::Spring: return make_spring(params);
    case Preset::Collision: return make_collision(params);
    case Preset::Custom: break;
  }
  throw ConfigError(ConfigErrorKind::Invalid, "custom models are assembled by hand, not by preset");
}

MasModel make_model(std::string_view preset, const ModelParams& params) {
  const auto parsed = parse_preset(preset);
  if (!parsed) throw ConfigError(ConfigErrorKind::Invalid, "unknown preset '" + std::string(preset) + "'");
  return make_model(*parsed, params);
}

void step_into(const MasModel& model, const JointState& x, const JointAction& u,
               const UncertaintySample& sample, JointState& next) {
  model.check_state(x);
  model.check_action(u);
  if (sample.noise.size() != model.agents * model.noise_dim) {
    throw ContractError("noise sample has " + std::to_string(sample.noise.size()) +
                        " entries, expected " + std::to_string(model.agents * model.noise_dim));
  }
  if (next.agents() != model.agents || next.dim() != model.state_dim) next = model.zero_state();
  model.transition(x, u, sample, next);
}

JointState step(const MasModel& model, const JointState& x, const JointAction& u,
                const UncertaintySample& sample) {
  JointState next = model.zero_state();
  step_into(model, x, u, sample, next);
  return next;
}

void resample_noise(const MasModel& model, Rng& rng, UncertaintySample& sample) {
  sample.noise.assign(model.agents * model.noise_dim, 0.0);
  if (model.noise_scale == 0.0) return;
  std::normal_distribution<double> noise(0.0, model.noise_scale);
  for (double& w : sample.noise) w = noise(rng);
}

UncertaintySample sample_uncertainty(const MasModel& model, Rng& rng) {
  UncertaintySample s;
  std::normal_distribution<double> prior(0.0, 1.0);
  s.theta = prior(rng);
  resample_noise(model, rng, s);
  return s;
}

UncertaintySample sample_uncertainty(const MasModel& model, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_uncertainty(model, rng);
}

bool is_safe(const MasModel& model, const JointState& x) { return model.safe ? model.safe(x) : true; }

std::vector<bool> agent_safety(const MasModel& model, const JointState& x) {
  if (model.agent_safe) return model.agent_safe(x);
  return std::vector<bool>(x.agents(), is_safe(model, x));
}

double cost(const MasModel& model, const JointState& x) { return model.cost_fn ? model.cost_fn(x) : 0.0; }

double reward(const MasModel& model, const JointState& x, const JointAction& u) {
  model.check_state(x);
  double exponent = model.weight_u * u.squared_norm();
  for (std::size_t i = 0; i < x.agents(); ++i) {
    const auto& w = model.weight_x.at(i);
    for (std::size_t k = 0; k < x.dim(); ++k) {
      const double d = x(i, k) - model.x_ref.at(k);
      exponent += w.at(k) * d * d;
    }
  }
  return std::exp(-exponent);
}

}  // namespace rsf
