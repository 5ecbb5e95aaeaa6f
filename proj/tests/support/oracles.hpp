#pragma once

// Reference implementations used as test oracles. They are written directly from the
// defining formulas, in long double where it helps, and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "rsf/dynamics.hpp"
#include "rsf/value.hpp"

namespace rsf::test {

// f(x, u, w; theta) = x, zero noise, every state safe, zero cost.
inline MasModel make_static_model(std::size_t agents, std::size_t action_dim = 1) {
  MasModel m;
  m.preset = Preset::Custom;
  m.agents = agents;
  m.state_dim = 2;
  m.noise_dim = 2;
  m.action_dims.assign(agents, action_dim);
  m.noise_scale = 0.0;
  m.gamma = 0.99;
  m.x_ref = {0.0, 0.0};
  m.weight_u = 0.0;
  m.weight_x.assign(agents, {0.0, 0.0});
  m.transition = [](const JointState& x, const JointAction&, const UncertaintySample&, JointState& next) {
    next = x;
  };
  m.safe = [](const JointState&) { return true; };
  m.cost_fn = [](const JointState&) { return 0.0; };
  return m;
}

// Deterministic model with constant unit cost and identity dynamics.
inline MasModel make_unit_cost_model(double gamma) {
  MasModel m = make_static_model(1);
  m.gamma = gamma;
  m.cost_fn = [](const JointState&) { return 1.0; };
  return m;
}

// Integrator x1' = x1 + u for every agent, noise ignored; used where the barrier must
// depend on the action.
inline MasModel make_integrator_model(std::size_t agents) {
  MasModel m = make_static_model(agents);
  m.transition = [](const JointState& x, const JointAction& u, const UncertaintySample& s, JointState& next) {
    next = x;
    for (std::size_t i = 0; i < x.agents(); ++i) {
      const double w = s.noise.empty() ? 0.0 : s.noise[i * 2];
      next(i, 0) = x(i, 0) + (u.agents[i].empty() ? 0.0 : u.agents[i][0]) + w;
    }
  };
  return m;
}

inline Barrier constant_barrier(double h, double xi = 0.0) {
  return Barrier{std::make_shared<ConstantValue>(xi - h), xi};
}

// V(x) = sum_i x1^i^2, so h = xi - sum of squared positions.
class QuadraticValue final : public ValueFunction {
 public:
  double evaluate(const JointState& x) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < x.agents(); ++i) v += x(i, 0) * x(i, 0);
    return v;
  }
};

inline long double naive_entropic(std::span<const double> values, long double beta) {
  long double acc = 0.0L;
  for (double v : values) acc += std::exp(beta * static_cast<long double>(v));
  return std::log(acc / static_cast<long double>(values.size())) / beta;
}

inline long double naive_lower(std::span<const double> values, long double beta) {
  long double acc = 0.0L;
  for (double v : values) acc += std::exp(-beta * static_cast<long double>(v));
  return -std::log(acc / static_cast<long double>(values.size())) / beta;
}

inline double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline long double hand_delta(long double beta, long double alpha, long double eps, long double h0, unsigned k) {
  long double first = 1.0L - std::exp(-beta * (alpha * h0 + eps));
  long double next = 1.0L;
  for (unsigned j = 1; j < k; ++j) next *= 1.0L - std::exp(-beta * eps);
  return 1.0L - first * next;
}

// gamma + gamma^2 + ... + gamma^H by direct accumulation.
inline long double geometric_tail(long double gamma, std::size_t horizon) {
  long double sum = 0.0L;
  long double g = 1.0L;
  for (std::size_t k = 1; k <= horizon; ++k) {
    g *= gamma;
    sum += g;
  }
  return sum;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// Smallest distance from `target` to the closed ball B(center, r), found numerically:
// zero if the target lies inside, otherwise a random multistart over the sphere
// followed by shrinking-step hill climbing on the angle.
inline double ball_search_distance(std::span<const double> target, std::span<const double> center, double r,
                                   std::mt19937_64& rng) {
  const std::size_t d = target.size();
  if (distance(target, center) <= r) return 0.0;
  if (r == 0.0) return distance(target, center);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto on_sphere = [&](std::vector<double> dir) {
    double n = 0.0;
    for (double v : dir) n += v * v;
    n = std::sqrt(n);
    std::vector<double> p(d);
    for (std::size_t k = 0; k < d; ++k) p[k] = center[k] + r * dir[k] / n;
    return std::pair{p, dir};
  };
  std::vector<double> best_dir(d);
  double best = INFINITY;
  for (int s = 0; s < 400; ++s) {
    std::vector<double> dir(d);
    for (auto& v : dir) v = gauss(rng);
    auto [p, ddir] = on_sphere(dir);
    const double dist = distance(target, p);
    if (dist < best) {
      best = dist;
      best_dir = ddir;
    }
  }
  double step = 0.5;
  int misses = 0;
  for (int it = 0; it < 20000 && step > 1e-10; ++it) {
    std::vector<double> dir = best_dir;
    double n = 0.0;
    for (double v : dir) n += v * v;
    n = std::sqrt(n);
    for (auto& v : dir) v = v / n + step * gauss(rng);
    auto [p, ddir] = on_sphere(dir);
    const double dist = distance(target, p);
    if (dist < best) {
      best = dist;
      best_dir = ddir;
      misses = 0;
    } else if (++misses == 30) {
      step *= 0.5;
      misses = 0;
    }
  }
  return best;
}

// Every combination of the other agents' grid actions, agent `fixed` held at `own`.
inline std::vector<JointAction> all_other_combinations(const MasModel& model, std::size_t fixed,
                                                       const std::vector<double>& own,
                                                       const std::vector<double>& grid) {
  std::vector<JointAction> out{model.zero_action()};
  out.front().agents[fixed] = own;
  for (std::size_t j = 0; j < model.agents; ++j) {
    if (j == fixed || !model.actuated(j)) continue;
    std::vector<JointAction> next;
    for (const JointAction& partial : out) {
      for (double g : grid) {
        JointAction a = partial;
        a.agents[j] = {g};
        next.push_back(a);
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace rsf::test
