#pragma once

// Seeded closed-loop rollouts and the experiment metrics computed from them.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rsf/dynamics.hpp"
#include "rsf/filters.hpp"
#include "rsf/policy.hpp"
#include "rsf/value.hpp"

namespace rsf {

struct StepDecision {
  JointAction action;
  std::vector<std::optional<Branch>> branches;  // per agent; nullopt for unactuated agents
  std::vector<std::optional<bool>> feasible;    // pessimistic branch feasibility per agent
};

class Controller {
 public:
  virtual ~Controller() = default;

  /// Action for state `x` at time `step` of the rollout seeded with `rollout_seed`.
  virtual StepDecision decide(const JointState& x, std::uint64_t rollout_seed, std::size_t step) const = 0;

  /// Whether decisions carry filter branch/feasibility flags.
  virtual bool filtered() const noexcept { return false; }
};

class PolicyController final : public Controller {
 public:
  explicit PolicyController(Policy policy) : policy_(std::move(policy)) {}
  StepDecision decide(const JointState& x, std::uint64_t rollout_seed, std::size_t step) const override;

 private:
  Policy policy_;
};

/// Every actuated agent runs the switching filter independently with its own seed
/// derived from (rollout seed, step, agent).
class SwitchingController final : public Controller {
 public:
  SwitchingController(MasModel model, Barrier barrier, Policy nominal, Policy safe, FilterConfig cfg);
  StepDecision decide(const JointState& x, std::uint64_t rollout_seed, std::size_t step) const override;
  bool filtered() const noexcept override { return true; }

 private:
  MasModel model_;
  Barrier barrier_;
  Policy nominal_;
  Policy safe_;
  FilterConfig cfg_;
};

/// Joint filter over all agents; falls back to the safe policy when infeasible.
class CentralizedController final : public Controller {
 public:
  CentralizedController(MasModel model, Barrier barrier, Policy nominal, Policy safe, FilterConfig cfg);
  StepDecision decide(const JointState& x, std::uint64_t rollout_seed, std::size_t step) const override;
  bool filtered() const noexcept override { return true; }

 private:
  MasModel model_;
  Barrier barrier_;
  Policy nominal_;
  Policy safe_;
  FilterConfig cfg_;
};

std::uint64_t agent_step_seed(std::uint64_t rollout_seed, std::size_t step, std::size_t agent) noexcept;

struct RolloutRecord {
  std::uint64_t seed = 0;
  double theta = 0.0;
  std::vector<JointState> states;    // T + 1
  std::vector<JointAction> actions;  // T
  std::vector<std::vector<std::optional<Branch>>> branches;  // T x M, filtered runs only
  std::vector<std::vector<std::optional<bool>>> feasible;    // T x M, filtered runs only
  std::vector<bool> safe;                    // T + 1, joint safety per state
  std::vector<std::vector<bool>> agent_safe;  // T + 1 x M
  std::vector<double> rewards;               // T, r(x_k, u_k)
  bool filtered = false;

  std::size_t steps() const noexcept { return actions.size(); }
};

struct RolloutOptions {
  std::optional<double> theta;  // force theta instead of sampling it
};

/// theta is drawn once per rollout, process noise once per step; deterministic in `seed`.
/// Controller errors are rethrown with the step index attached.
RolloutRecord rollout(const MasModel& model, const Controller& controller, const JointState& x0,
                      std::size_t steps, std::uint64_t seed, const RolloutOptions& options = {});

struct Metrics {
  std::size_t rollouts = 0;
  std::size_t steps = 0;             // (rollout, step) pairs counted, states x_1..x_T
  std::size_t violations = 0;        // pairs whose joint state is unsafe
  double violation_rate = 0.0;
  std::vector<std::size_t> agent_violations;
  double mse = 0.0;                  // squared position error to x_ref, over steps, rollouts, agents
  double cumulative_reward = 0.0;    // mean over rollouts of sum_k r(x_k, u_k)
  std::size_t filtered_decisions = 0;
  double feasibility_rate = 0.0;     // fraction of filtered agent-steps with pessimistic feasible
  std::vector<double> agent_feasibility_rate;
  std::array<std::size_t, 3> branch_counts{};  // indexed by Branch
};

Metrics compute_metrics(std::span<const RolloutRecord> records, const MasModel& model);

enum class SweepAxis { Beta, Xi, Agents };

std::string_view sweep_axis_name(SweepAxis axis) noexcept;

struct SweepSetup {
  MasModel model;
  std::shared_ptr<const Controller> controller;
  std::function<JointState(std::uint64_t rollout_seed)> initial_state;
};

using ControllerFactory = std::function<SweepSetup(double value)>;

struct SweepRow {
  SweepAxis axis = SweepAxis::Beta;
  double value = 0.0;
  Metrics pooled;
  double violations_mean = 0.0;
  double violations_std = 0.0;
  double mse_mean = 0.0;
  double mse_std = 0.0;
  double reward_mean = 0.0;
  double reward_std = 0.0;
  double feas_rate_mean = 0.0;
};

/// Runs `rollouts` rollouts per value with seeds base_seed + index and aggregates
/// per-rollout metrics into means and sample standard deviations.
std::vector<SweepRow> sweep(const ControllerFactory& factory, SweepAxis axis, std::span<const double> values,
                            std::size_t rollouts, std::size_t steps, std::uint64_t base_seed);

}  // namespace rsf
