#include "rsf/sim.hpp"

#include <cmath>

#include "rsf/error.hpp"

namespace rsf {

std::uint64_t agent_step_seed(std::uint64_t rollout_seed, std::size_t step, std::size_t agent) noexcept {
  return derive_seed(rollout_seed, {step, agent});
}

StepDecision PolicyController::decide(const JointState& x, std::uint64_t, std::size_t) const {
  StepDecision d;
  d.action = eval_policy(policy_, x);
  return d;
}

SwitchingController::SwitchingController(MasModel model, Barrier barrier, Policy nominal, Policy safe,
                                         FilterConfig cfg)
    : model_(std::move(model)), barrier_(std::move(barrier)), nominal_(std::move(nominal)),
      safe_(std::move(safe)), cfg_(cfg) {
  cfg_.validate();
}

StepDecision SwitchingController::decide(const JointState& x, std::uint64_t rollout_seed, std::size_t step) const {
  const JointAction nominal = eval_policy(nominal_, x);
  const JointAction safe = eval_policy(safe_, x);
  StepDecision d;
  d.action = model_.zero_action();
  d.branches.assign(model_.agents, std::nullopt);
  d.feasible.assign(model_.agents, std::nullopt);
  for (std::size_t i = 0; i < model_.agents; ++i) {
    if (!model_.actuated(i)) continue;
    const auto out = switching_filter(i, model_, barrier_, x, nominal, safe, cfg_, agent_step_seed(rollout_seed, step, i));
    d.action.agents[i] = out.action;
    d.branches[i] = out.branch;
    d.feasible[i] = out.feasible;
  }
  return d;
}

CentralizedController::CentralizedController(MasModel model, Barrier barrier, Policy nominal, Policy safe,
                                             FilterConfig cfg)
    : model_(std::move(model)), barrier_(std::move(barrier)), nominal_(std::move(nominal)),
      safe_(std::move(safe)), cfg_(cfg) {
  cfg_.validate();
}

StepDecision CentralizedController::decide(const JointState& x, std::uint64_t rollout_seed, std::size_t step) const {
  const JointAction nominal = eval_policy(nominal_, x);
  const auto out = centralized_filter(model_, barrier_, x, nominal, cfg_, derive_seed(rollout_seed, {step}));
  StepDecision d;
  d.action = out ? out->action : eval_policy(safe_, x);
  d.branches.assign(model_.agents, std::nullopt);
  d.feasible.assign(model_.agents, std::nullopt);
  for (std::size_t i = 0; i < model_.agents; ++i) {
    if (!model_.actuated(i)) continue;
    d.branches[i] = Branch::Centralized;
    d.feasible[i] = out.has_value();
  }
  return d;
}

RolloutRecord rollout(const MasModel& model, const Controller& controller, const JointState& x0,
                      std::size_t steps, std::uint64_t seed, const RolloutOptions& options) {
  model.check_state(x0);
  RolloutRecord rec;
  rec.seed = seed;
  rec.filtered = controller.filtered();

  Rng rng = make_rng(seed);
  UncertaintySample sample;
  std::normal_distribution<double> prior(0.0, 1.0);
  sample.theta = prior(rng);
  if (options.theta) sample.theta = *options.theta;
  rec.theta = sample.theta;

  rec.states.reserve(steps + 1);
  rec.actions.reserve(steps);
  rec.states.push_back(x0);
  rec.safe.push_back(is_safe(model, x0));
  rec.agent_safe.push_back(agent_safety(model, x0));

  for (std::size_t k = 0; k < steps; ++k) {
    const JointState& x = rec.states.back();
    StepDecision decision;
    try {
      decision = controller.decide(x, seed, k);
      model.check_action(decision.action);
    } catch (Error& e) {
      e.attach_step(k);
      throw;
    }
    resample_noise(model, rng, sample);
    JointState next = step(model, x, decision.action, sample);
    rec.rewards.push_back(reward(model, x, decision.action));
    if (rec.filtered) {
      rec.branches.push_back(std::move(decision.branches));
      rec.feasible.push_back(std::move(decision.feasible));
    }
    rec.actions.push_back(std::move(decision.action));
    rec.safe.push_back(is_safe(model, next));
    rec.agent_safe.push_back(agent_safety(model, next));
    rec.states.push_back(std::move(next));
  }
  return rec;
}

Metrics compute_metrics(std::span<const RolloutRecord> records, const MasModel& model) {
  if (records.empty()) throw ContractError("metrics of an empty record list");
  Metrics m;
  m.rollouts = records.size();
  m.agent_violations.assign(model.agents, 0);
  std::vector<std::size_t> agent_feasible(model.agents, 0);
  std::vector<std::size_t> agent_filtered(model.agents, 0);
  std::size_t feasible_total = 0;
  double sq_error = 0.0;
  std::size_t sq_count = 0;
  double reward_total = 0.0;
  const double ref = model.x_ref.empty() ? 0.0 : model.x_ref[0];

  for (const auto& rec : records) {
    for (std::size_t k = 1; k < rec.states.size(); ++k) {
      ++m.steps;
      if (!rec.safe[k]) ++m.violations;
      for (std::size_t i = 0; i < model.agents && i < rec.agent_safe[k].size(); ++i) {
        if (!rec.agent_safe[k][i]) ++m.agent_violations[i];
      }
      const JointState& x = rec.states[k];
      for (std::size_t i = 0; i < x.agents(); ++i) {
        const double e = x(i, 0) - ref;
        sq_error += e * e;
        ++sq_count;
      }
    }
    for (double r : rec.rewards) reward_total += r;
    for (std::size_t k = 0; k < rec.branches.size(); ++k) {
      for (std::size_t i = 0; i < rec.branches[k].size(); ++i) {
        const auto& b = rec.branches[k][i];
        if (!b) continue;
        ++m.branch_counts[static_cast<std::size_t>(*b)];
        ++m.filtered_decisions;
        ++agent_filtered[i];
        if (rec.feasible[k][i].value_or(false)) {
          ++feasible_total;
          ++agent_feasible[i];
        }
      }
    }
  }
  m.violation_rate = m.steps ? static_cast<double>(m.violations) / static_cast<double>(m.steps) : 0.0;
  m.mse = sq_count ? sq_error / static_cast<double>(sq_count) : 0.0;
  m.cumulative_reward = reward_total / static_cast<double>(records.size());
  m.feasibility_rate =
      m.filtered_decisions ? static_cast<double>(feasible_total) / static_cast<double>(m.filtered_decisions) : 0.0;
  m.agent_feasibility_rate.assign(model.agents, 0.0);
  for (std::size_t i = 0; i < model.agents; ++i) {
    if (agent_filtered[i]) {
      m.agent_feasibility_rate[i] = static_cast<double>(agent_feasible[i]) / static_cast<double>(agent_filtered[i]);
    }
  }
  return m;
}

std::string_view sweep_axis_name(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::Beta: return "beta";
    case SweepAxis::Xi: return "xi";
    case SweepAxis::Agents: return "agents";
  }
  return "unknown";
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return out;
}

}  // namespace

std::vector<SweepRow> sweep(const ControllerFactory& factory, SweepAxis axis, std::span<const double> values,
                            std::size_t rollouts, std::size_t steps, std::uint64_t base_seed) {
  if (values.empty()) throw ContractError("sweep needs at least one parameter value");
  if (rollouts == 0) throw ContractError("sweep needs at least one rollout per value");
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double value : values) {
    const SweepSetup setup = factory(value);
    std::vector<RolloutRecord> records;
    records.reserve(rollouts);
    std::vector<double> violations, mse, rewards, feas;
    for (std::size_t r = 0; r < rollouts; ++r) {
      const std::uint64_t seed = base_seed + r;
      records.push_back(rollout(setup.model, *setup.controller, setup.initial_state(seed), steps, seed));
      const Metrics single = compute_metrics(std::span(&records.back(), 1), setup.model);
      violations.push_back(static_cast<double>(single.violations));
      mse.push_back(single.mse);
      rewards.push_back(single.cumulative_reward);
      feas.push_back(single.feasibility_rate);
    }
    SweepRow row;
    row.axis = axis;
    row.value = value;
    row.pooled = compute_metrics(records, setup.model);
    const auto v = mean_std(violations);
    const auto e = mean_std(mse);
    const auto w = mean_std(rewards);
    row.violations_mean = v.mean;
    row.violations_std = v.std;
    row.mse_mean = e.mean;
    row.mse_std = e.std;
    row.reward_mean = w.mean;
    row.reward_std = w.std;
    row.feas_rate_mean = mean_std(feas).mean;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rsf
