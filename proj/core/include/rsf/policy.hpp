#pragma once

// Deterministic state-feedback policies standing in for trained nominal and
// safe policies, plus a cross-entropy search over their gains.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rsf/dynamics.hpp"

namespace rsf {

enum class PolicyKind { Proportional, Improved };

struct AgentGains {
  double kp = 0.0;
  double kd = 0.0;
  double v_ref = 0.0;  // velocity setpoint; zero regulates to rest

  bool operator==(const AgentGains&) const = default;
};

/// u^i = clip(-kp (x^i_1 - x_ref,1) - kd (x^i_2 - v_ref^i), U) for each actuated agent.
struct Policy {
  PolicyKind kind = PolicyKind::Proportional;
  std::vector<std::size_t> action_dims;
  std::vector<AgentGains> gains;  // one entry per agent; ignored for unactuated agents
  std::vector<double> reference;
  ActionBox box;

  bool operator==(const Policy&) const = default;
};

/// `gains` holds one entry per actuated agent, in agent order.
Policy make_proportional(const MasModel& model, std::span<const AgentGains> gains);
/// Same gains for every actuated agent.
Policy make_proportional(const MasModel& model, AgentGains gains);

JointAction eval_policy(const Policy& policy, const JointState& x);
void eval_policy_into(const Policy& policy, const JointState& x, JointAction& out);

/// Flattened (kp, kd) of the actuated agents, the search space of cem_improve.
std::vector<double> policy_parameters(const Policy& policy);
Policy with_parameters(const Policy& policy, std::span<const double> parameters);

struct CemConfig {
  std::size_t iterations = 10;
  std::size_t population = 16;
  double elite_fraction = 0.25;
  double initial_std = 0.25;
  std::size_t horizon = 100;
  std::size_t samples = 4;
  std::vector<JointState> eval_states;
};

struct CemResult {
  Policy policy;
  double initial_objective = 0.0;
  double best_objective = 0.0;
  std::vector<double> trace;  // best objective after each iteration
};

/// Mean Monte-Carlo cost-to-go over `states`, with common random numbers:
/// every policy sees identical (theta, omega) draws for a given seed.
double mean_cost_to_go(const MasModel& model, const Policy& policy, std::span<const JointState> states,
                       std::size_t horizon, std::size_t samples, std::uint64_t seed);

/// Cross-entropy search over proportional gains minimizing mean_cost_to_go.
/// Returns the best evaluated parameters (the initial policy if nothing beats it).
CemResult cem_improve(const MasModel& model, const Policy& init, const CemConfig& config,
                      std::uint64_t seed);

}  // namespace rsf
