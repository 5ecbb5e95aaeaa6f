#pragma once

// Uncertain multi-agent dynamics and the two benchmark systems
// (spring-coupled transport, collision avoidance).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/seeding.hpp"

namespace rsf {

/// Concatenated agent states, stored agent-major in one flat buffer.
class JointState {
 public:
  JointState() = default;
  JointState(std::size_t agents, std::size_t dim);
  JointState(std::size_t agents, std::size_t dim, std::vector<double> values);

  static JointState from_agents(const std::vector<std::vector<double>>& agents);

  std::size_t agents() const noexcept { return agents_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> agent(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> agent(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

  double& operator()(std::size_t i, std::size_t k) { return values_[i * dim_ + k]; }
  double operator()(std::size_t i, std::size_t k) const { return values_[i * dim_ + k]; }

  std::span<const double> flat() const noexcept { return values_; }
  std::span<double> flat() noexcept { return values_; }

  bool all_finite() const noexcept;

  bool operator==(const JointState&) const = default;

 private:
  std::size_t agents_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

/// Per-agent control inputs; unactuated agents carry empty vectors.
struct JointAction {
  std::vector<std::vector<double>> agents;

  std::size_t size() const noexcept { return agents.size(); }
  double squared_norm() const noexcept;
  double squared_distance(const JointAction& other) const;

  bool operator==(const JointAction&) const = default;
};

struct ActionBox {
  double lower = -1.0;
  double upper = 1.0;

  bool contains(double u) const noexcept { return u >= lower && u <= upper; }
  double clamp(double u) const noexcept;

  bool operator==(const ActionBox&) const = default;
};

/// One realization of the model parameter and the process noise of every agent.
struct UncertaintySample {
  double theta = 0.0;
  std::vector<double> noise;  // agents * noise_dim, agent-major
};

enum class Preset { Spring, Collision, Custom };

std::string_view preset_name(Preset preset) noexcept;
std::optional<Preset> parse_preset(std::string_view name) noexcept;

struct ModelParams {
  std::optional<std::size_t> agents;
  std::optional<double> noise_scale;
  std::optional<double> gamma;
  std::optional<ActionBox> box;
};

class MasModel;

using TransitionFn = std::function<void(const JointState& x, const JointAction& u,
                                        const UncertaintySample& s, JointState& next)>;
using StatePredicate = std::function<bool(const JointState&)>;
using StateCost = std::function<double(const JointState&)>;
using AgentSafetyFn = std::function<std::vector<bool>(const JointState&)>;

/// Immutable description of an uncertain multi-agent system. Presets are built with
/// make_model(); custom systems fill the hooks directly.
class MasModel {
 public:
  Preset preset = Preset::Custom;
  std::size_t agents = 0;
  std::size_t state_dim = 2;
  std::size_t noise_dim = 2;
  std::vector<std::size_t> action_dims;
  double noise_scale = 0.0;
  double gamma = 0.99;
  ActionBox box;

  std::vector<double> x_ref;
  double weight_u = 0.0;                       // W_u = weight_u * I
  std::vector<std::vector<double>> weight_x;   // diagonal of W_x^i per agent

  TransitionFn transition;
  StatePredicate safe;
  StateCost cost_fn;
  AgentSafetyFn agent_safe;  // optional per-agent breakdown

  bool actuated(std::size_t agent) const { return action_dims.at(agent) > 0; }
  std::size_t actuated_count() const noexcept;

  JointState zero_state() const { return JointState(agents, state_dim); }
  JointAction zero_action() const;

  void check_state(const JointState& x) const;
  void check_action(const JointAction& u) const;
};

MasModel make_model(Preset preset, const ModelParams& params = {});
MasModel make_model(std::string_view preset, const ModelParams& params = {});

/// x' = f(x, u, omega; theta).
JointState step(const MasModel& model, const JointState& x, const JointAction& u,
                const UncertaintySample& sample);
void step_into(const MasModel& model, const JointState& x, const JointAction& u,
               const UncertaintySample& sample, JointState& next);

/// theta ~ N(0, 1), noise ~ N(0, sigma_n^2) per entry.
UncertaintySample sample_uncertainty(const MasModel& model, std::uint64_t seed);
UncertaintySample sample_uncertainty(const MasModel& model, Rng& rng);
/// Fresh process noise only; theta is left untouched.
void resample_noise(const MasModel& model, Rng& rng, UncertaintySample& sample);

bool is_safe(const MasModel& model, const JointState& x);
std::vector<bool> agent_safety(const MasModel& model, const JointState& x);
double cost(const MasModel& model, const JointState& x);
double reward(const MasModel& model, const JointState& x, const JointAction& u);

/// 1 / (1 + exp(-10 z)).
double sigm10(double z) noexcept;
/// Saturating linear map onto [-1, 1].
double saturate(double z) noexcept;

}  // namespace rsf
