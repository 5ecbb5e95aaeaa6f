#include "rsf/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsf/error.hpp"
#include "rsf/value.hpp"

namespace rsf {

Policy make_proportional(const MasModel& model, std::span<const AgentGains> gains) {
  if (gains.size() != model.actuated_count()) {
    throw ContractError("expected gains for " + std::to_string(model.actuated_count()) +
                        " actuated agents, got " + std::to_string(gains.size()));
  }
  for (std::size_t d : model.action_dims) {
    if (d > 1) throw ContractError("proportional policies support scalar actions only");
  }
  Policy p;
  p.kind = PolicyKind::Proportional;
  p.action_dims = model.action_dims;
  p.reference = model.x_ref;
  p.box = model.box;
  p.gains.assign(model.agents, AgentGains{});
  std::size_t next = 0;
  for (std::size_t i = 0; i < model.agents; ++i) {
    if (model.actuated(i)) p.gains[i] = gains[next++];
  }
  return p;
}

Policy make_proportional(const MasModel& model, AgentGains gains) {
  std::vector<AgentGains> all(model.actuated_count(), gains);
  return make_proportional(model, all);
}

void eval_policy_into(const Policy& policy, const JointState& x, JointAction& out) {
  if (x.agents() != policy.action_dims.size() || x.dim() == 0 || policy.reference.size() < x.dim()) {
    throw ContractError("policy evaluated on a state of the wrong shape");
  }
  out.agents.resize(x.agents());
  for (std::size_t i = 0; i < x.agents(); ++i) {
    auto& a = out.agents[i];
    a.resize(policy.action_dims[i]);
    if (a.empty()) continue;
    const AgentGains& g = policy.gains[i];
    double u = -g.kp * (x(i, 0) - policy.reference[0]);
    if (x.dim() > 1) u -= g.kd * (x(i, 1) - g.v_ref);
    a[0] = policy.box.clamp(u);
  }
}

JointAction eval_policy(const Policy& policy, const JointState& x) {
  JointAction out;
  eval_policy_into(policy, x, out);
  return out;
}

std::vector<double> policy_parameters(const Policy& policy) {
  std::vector<double> params;
  for (std::size_t i = 0; i < policy.action_dims.size(); ++i) {
    if (policy.action_dims[i] == 0) continue;
    params.push_back(policy.gains[i].kp);
    params.push_back(policy.gains[i].kd);
  }
  return params;
}

Policy with_parameters(const Policy& policy, std::span<const double> parameters) {
  Policy out = policy;
  std::size_t next = 0;
  for (std::size_t i = 0; i < out.action_dims.size(); ++i) {
    if (out.action_dims[i] == 0) continue;
    if (next + 2 > parameters.size()) throw ContractError("too few policy parameters");
    out.gains[i].kp = parameters[next];
    out.gains[i].kd = parameters[next + 1];
    next += 2;
  }
  if (next != parameters.size()) throw ContractError("too many policy parameters");
  return out;
}

double mean_cost_to_go(const MasModel& model, const Policy& policy, std::span<const JointState> states,
                       std::size_t horizon, std::size_t samples, std::uint64_t seed) {
  if (states.empty()) throw ContractError("objective needs at least one evaluation state");
  double total = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    total += mc_cost_to_go(model, policy, states[s], horizon, samples, derive_seed(seed, {s}));
  }
  return total / static_cast<double>(states.size());
}

CemResult cem_improve(const MasModel& model, const Policy& init, const CemConfig& config,
                      std::uint64_t seed) {
  if (config.population < 2) throw ContractError("cross-entropy search needs a population of at least 2");
  if (!(config.elite_fraction > 0.0 && config.elite_fraction <= 1.0)) {
    throw ContractError("elite fraction must lie in (0, 1]");
  }
  const std::uint64_t crn_seed = derive_seed(seed, {0});
  auto objective = [&](const Policy& p) {
    return mean_cost_to_go(model, p, config.eval_states, config.horizon, config.samples, crn_seed);
  };

  CemResult result;
  result.policy = init;
  result.initial_objective = objective(init);
  result.best_objective = result.initial_objective;
  if (config.iterations == 0) return result;

  std::vector<double> mean = policy_parameters(init);
  std::vector<double> stddev(mean.size(), config.initial_std);
  std::vector<double> best_params = mean;
  const std::size_t elites = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(config.elite_fraction * static_cast<double>(config.population))));

  Rng rng = make_rng(derive_seed(seed, {1}));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    std::vector<std::vector<double>> candidates(config.population, std::vector<double>(mean.size()));
    std::vector<double> scores(config.population);
    for (std::size_t c = 0; c < config.population; ++c) {
      for (std::size_t k = 0; k < mean.size(); ++k) {
        candidates[c][k] = std::max(0.0, mean[k] + stddev[k] * normal(rng));
      }
      scores[c] = objective(with_parameters(init, candidates[c]));
    }
    std::vector<std::size_t> order(config.population);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    if (scores[order[0]] < result.best_objective) {
      result.best_objective = scores[order[0]];
      best_params = candidates[order[0]];
    }
    result.trace.push_back(result.best_objective);

    for (std::size_t k = 0; k < mean.size(); ++k) {
      double m = 0.0;
      for (std::size_t e = 0; e < elites; ++e) m += candidates[order[e]][k];
      m /= static_cast<double>(elites);
      double var = 0.0;
      for (std::size_t e = 0; e < elites; ++e) {
        const double d = candidates[order[e]][k] - m;
        var += d * d;
      }
      mean[k] = m;
      stddev[k] = std::sqrt(var / static_cast<double>(elites)) + 1e-3;
    }
  }

  if (result.best_objective < result.initial_objective) {
    result.policy = with_parameters(init, best_params);
    result.policy.kind = PolicyKind::Improved;
  }
  return result;
}

}  // namespace rsf
