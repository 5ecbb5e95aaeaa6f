#include "rsf/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rsf/error.hpp"
#include "rsf/risk.hpp"

namespace rsf {

std::string_view radius_mode_name(RadiusMode mode) noexcept {
  return mode == RadiusMode::Fixed ? "fixed" : "margin";
}

std::string_view branch_name(Branch branch) noexcept {
  switch (branch) {
    case Branch::Centralized: return "centralized";
    case Branch::Pessimistic: return "pessimistic";
    case Branch::Proximity: return "proximity";
  }
  return "unknown";
}

void FilterConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(ConfigErrorKind::Invalid, "filter: " + msg); };
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0, 1]");
  if (!(epsilon >= 0.0 && std::isfinite(epsilon))) fail("epsilon must be finite and >= 0");
  if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0)) fail("alpha_bar must lie in [0, 1]");
  if (!(epsilon_bar >= 0.0 && std::isfinite(epsilon_bar))) fail("epsilon_bar must be finite and >= 0");
  if (!(beta > 0.0 && std::isfinite(beta))) fail("beta must be finite and > 0");
  if (samples < 1) fail("samples must be >= 1");
  if (grid < 2) fail("grid must be >= 2");
  if (!(radius >= 0.0 && std::isfinite(radius))) fail("radius must be finite and >= 0");
  if (!(lipschitz_h > 0.0) || !(lipschitz_fu > 0.0)) fail("Lipschitz constants must be > 0");
  if (!(tolerance >= 0.0 && std::isfinite(tolerance))) fail("tolerance must be finite and >= 0");
  if (radius_mode == RadiusMode::Margin && !(alpha < alpha_bar && epsilon <= epsilon_bar)) {
    fail("margin-derived radius requires alpha < alpha_bar and epsilon <= epsilon_bar");
  }
}

std::vector<UncertaintySample> draw_risk_samples(const MasModel& model, std::uint64_t seed, std::size_t count) {
  std::vector<UncertaintySample> samples;
  samples.reserve(count);
  for (std::size_t s = 0; s < count; ++s) samples.push_back(sample_uncertainty(model, derive_seed(seed, {s})));
  return samples;
}

std::vector<double> action_grid(const ActionBox& box, std::size_t points) {
  if (points < 2) throw ContractError("action grid needs at least 2 points");
  std::vector<double> grid(points);
  const double span = box.upper - box.lower;
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = box.lower + span * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  grid.back() = box.upper;
  return grid;
}

namespace {

// Evaluates the risk condition for many actions at one state under fixed samples.
class ConditionEvaluator {
 public:
  ConditionEvaluator(const MasModel& model, const Barrier& barrier, const JointState& x,
                     const FilterConfig& cfg, std::span<const UncertaintySample> samples)
      : model_(model), barrier_(barrier), x_(x), cfg_(cfg), samples_(samples),
        next_(model.zero_state()), values_(samples.size()) {
    if (samples_.empty()) throw ContractError("risk condition needs at least one sample");
    h_x_ = barrier_(x_);
    if (!std::isfinite(h_x_)) throw ContractError("barrier value at the current state is not finite");
  }

  double h_x() const noexcept { return h_x_; }

  double margin(const JointAction& u) {
    for (std::size_t s = 0; s < samples_.size(); ++s) {
      step_into(model_, x_, u, samples_[s], next_);
      const double h = barrier_(next_);
      if (!std::isfinite(h)) throw ContractError("barrier value at a successor state is not finite");
      values_[s] = h;
    }
    return risk_lower(values_, cfg_.beta) - cfg_.alpha * h_x_ - cfg_.epsilon;
  }

 private:
  const MasModel& model_;
  const Barrier& barrier_;
  const JointState& x_;
  const FilterConfig& cfg_;
  std::span<const UncertaintySample> samples_;
  JointState next_;
  std::vector<double> values_;
  double h_x_ = 0.0;
};

// Cartesian product of the per-dimension grid for one agent; {{}} when unactuated.
std::vector<std::vector<double>> agent_candidates(const MasModel& model, std::size_t agent, std::size_t points) {
  const std::size_t dims = model.action_dims.at(agent);
  std::vector<std::vector<double>> out{{}};
  if (dims == 0) return out;
  const auto axis = action_grid(model.box, points);
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<std::vector<double>> grown;
    grown.reserve(out.size() * axis.size());
    for (const auto& prefix : out) {
      for (double v : axis) {
        auto c = prefix;
        c.push_back(v);
        grown.push_back(std::move(c));
      }
    }
    out = std::move(grown);
  }
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    total += d * d;
  }
  return total;
}

// Candidates ordered by distance to `nominal`, nominal itself first.
template <typename T, typename Dist>
std::vector<T> order_by_distance(T nominal, std::vector<T> grid, Dist dist) {
  std::vector<T> all;
  all.reserve(grid.size() + 1);
  all.push_back(std::move(nominal));
  for (auto& g : grid) all.push_back(std::move(g));
  std::vector<double> keys(all.size());
  for (std::size_t k = 0; k < all.size(); ++k) keys[k] = dist(all[k], all.front());
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<T> sorted;
  sorted.reserve(all.size());
  for (std::size_t k : order) sorted.push_back(std::move(all[k]));
  return sorted;
}

// Enumerates all grid combinations of the agents other than `agent`, with
// `agent`'s own action held fixed, and returns the minimum margin. When
// `stop_below` is set, stops as soon as the running minimum drops below it.
double min_over_others(std::size_t agent, const MasModel& model, ConditionEvaluator& eval,
                       std::span<const double> agent_action, std::size_t points,
                       std::optional<double> stop_below) {
  std::vector<std::size_t> others;
  std::vector<std::vector<std::vector<double>>> grids;
  for (std::size_t j = 0; j < model.agents; ++j) {
    if (j == agent || !model.actuated(j)) continue;
    others.push_back(j);
    grids.push_back(agent_candidates(model, j, points));
  }
  JointAction u = model.zero_action();
  u.agents[agent].assign(agent_action.begin(), agent_action.end());

  std::vector<std::size_t> counter(others.size(), 0);
  double worst = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t k = 0; k < others.size(); ++k) u.agents[others[k]] = grids[k][counter[k]];
    worst = std::min(worst, eval.margin(u));
    if (stop_below && worst < *stop_below) break;
    std::size_t k = 0;
    while (k < counter.size()) {
      if (++counter[k] < grids[k].size()) break;
      counter[k] = 0;
      ++k;
    }
    if (k == counter.size()) break;
  }
  return worst;
}

void require_actuated(const MasModel& model, std::size_t agent) {
  if (agent >= model.agents) throw ContractError("agent index " + std::to_string(agent) + " out of range");
  if (!model.actuated(agent)) throw ContractError("agent " + std::to_string(agent) + " has no actions to filter");
}

}  // namespace

ConditionResult check_condition(const MasModel& model, const Barrier& barrier, const JointState& x,
                                const JointAction& u, const FilterConfig& cfg,
                                std::span<const UncertaintySample> samples) {
  ConditionEvaluator eval(model, barrier, x, cfg, samples);
  const double m = eval.margin(u);
  return {m >= cfg.tolerance, m};
}

ConditionResult check_condition(const MasModel& model, const Barrier& barrier, const JointState& x,
                                const JointAction& u, const FilterConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto samples = draw_risk_samples(model, seed, cfg.samples);
  return check_condition(model, barrier, x, u, cfg, samples);
}

std::optional<JointOutcome> centralized_filter(const MasModel& model, const Barrier& barrier,
                                               const JointState& x, const JointAction& nominal,
                                               const FilterConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  model.check_state(x);
  model.check_action(nominal);
  const auto samples = draw_risk_samples(model, seed, cfg.samples);
  ConditionEvaluator eval(model, barrier, x, cfg, samples);

  std::vector<JointAction> grid{model.zero_action()};
  for (std::size_t i = 0; i < model.agents; ++i) {
    if (!model.actuated(i)) continue;
    const auto axis = agent_candidates(model, i, cfg.grid);
    std::vector<JointAction> grown;
    grown.reserve(grid.size() * axis.size());
    for (const auto& prefix : grid) {
      for (const auto& a : axis) {
        JointAction u = prefix;
        u.agents[i] = a;
        grown.push_back(std::move(u));
      }
    }
    grid = std::move(grown);
  }
  const auto candidates = order_by_distance(
      nominal, std::move(grid), [](const JointAction& a, const JointAction& b) { return a.squared_distance(b); });
  for (const auto& u : candidates) {
    const double m = eval.margin(u);
    if (m >= cfg.tolerance) return JointOutcome{u, m};
  }
  return std::nullopt;
}

double worst_case_margin(std::size_t agent, const MasModel& model, const Barrier& barrier,
                         const JointState& x, std::span<const double> agent_action,
                         const FilterConfig& cfg, std::span<const UncertaintySample> samples) {
  require_actuated(model, agent);
  ConditionEvaluator eval(model, barrier, x, cfg, samples);
  return min_over_others(agent, model, eval, agent_action, cfg.grid, std::nullopt);
}

std::optional<FilterOutcome> pessimistic_filter(std::size_t agent, const MasModel& model,
                                                const Barrier& barrier, const JointState& x,
                                                const JointAction& nominal, const FilterConfig& cfg,
                                                std::uint64_t seed) {
  cfg.validate();
  model.check_state(x);
  model.check_action(nominal);
  require_actuated(model, agent);
  const auto samples = draw_risk_samples(model, seed, cfg.samples);
  ConditionEvaluator eval(model, barrier, x, cfg, samples);

  const auto candidates =
      order_by_distance(nominal.agents[agent], agent_candidates(model, agent, cfg.grid),
                        [](const std::vector<double>& a, const std::vector<double>& b) { return squared_distance(a, b); });
  for (const auto& c : candidates) {
    const double worst = min_over_others(agent, model, eval, c, cfg.grid, cfg.tolerance);
    if (worst >= cfg.tolerance) return FilterOutcome{agent, c, Branch::Pessimistic, true, worst};
  }
  return std::nullopt;
}

std::vector<double> project_to_ball(std::span<const double> point, std::span<const double> center,
                                    double radius) {
  if (point.size() != center.size()) throw ContractError("ball projection: dimension mismatch");
  if (!(radius >= 0.0)) throw DomainError("ball projection: negative radius");
  const double dist = std::sqrt(squared_distance(point, center));
  std::vector<double> out(point.begin(), point.end());
  if (dist <= radius) return out;
  const double scale = radius / dist;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = center[k] + scale * (point[k] - center[k]);
  return out;
}

double proximity_radius(const FilterConfig& cfg, std::size_t agents, double h_x) {
  if (cfg.radius_mode == RadiusMode::Fixed) return cfg.radius;
  const double margin = (cfg.alpha_bar - cfg.alpha) * h_x + cfg.epsilon_bar - cfg.epsilon;
  const double r = margin / (static_cast<double>(agents) * cfg.lipschitz_h * cfg.lipschitz_fu);
  if (!(r >= 0.0)) {
    throw DomainError("proximity radius is negative (h(x) = " + std::to_string(h_x) +
                      "): state lies outside the region covered by the safe policy's margin");
  }
  return r;
}

namespace {

// Alternating projection onto box and ball; nullopt if it does not settle.
std::optional<std::vector<double>> ball_box_point(std::vector<double> p, std::span<const double> center,
                                                  double radius, const ActionBox& box) {
  constexpr int kIterations = 50;
  constexpr double kTol = 1e-9;
  for (int it = 0; it < kIterations; ++it) {
    for (double& v : p) v = box.clamp(v);
    if (std::sqrt(squared_distance(p, center)) <= radius + kTol) return p;
    p = project_to_ball(p, center, radius);
    if (std::all_of(p.begin(), p.end(), [&](double v) { return box.contains(v); })) return p;
  }
  return std::nullopt;
}

}  // namespace

std::vector<double> proximity_filter(std::size_t agent, const MasModel& model, const Barrier& barrier,
                                     const JointState& x, const JointAction& nominal,
                                     const JointAction& safe, const FilterConfig& cfg) {
  cfg.validate();
  model.check_state(x);
  model.check_action(nominal);
  model.check_action(safe);
  require_actuated(model, agent);
  const double h_x = cfg.radius_mode == RadiusMode::Margin ? barrier(x) : 0.0;
  const double r = proximity_radius(cfg, model.agents, h_x);
  const auto& center = safe.agents[agent];
  auto out = project_to_ball(nominal.agents[agent], center, r);
  if (!cfg.clip_to_box) return out;
  if (auto clipped = ball_box_point(std::move(out), center, r, model.box)) return *clipped;
  return center;
}

FilterOutcome switching_filter(std::size_t agent, const MasModel& model, const Barrier& barrier,
                               const JointState& x, const JointAction& nominal, const JointAction& safe,
                               const FilterConfig& cfg, std::uint64_t seed) {
  if (auto pess = pessimistic_filter(agent, model, barrier, x, nominal, cfg, seed)) return *pess;
  FilterOutcome out;
  out.agent = agent;
  out.branch = Branch::Proximity;
  out.feasible = false;
  out.action = proximity_filter(agent, model, barrier, x, nominal, safe, cfg);
  const auto samples = draw_risk_samples(model, seed, cfg.samples);
  out.margin = worst_case_margin(agent, model, barrier, x, out.action, cfg, samples);
  return out;
}

}  // namespace rsf
