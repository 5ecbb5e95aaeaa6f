#pragma once

// Risk-sensitive safety filters built on the value-defined barrier.
//
// All filters evaluate the condition
//     -R_beta[-h(x+)] >= alpha h(x) + eps,   x+ = f(x, u, omega; theta),
// on a finite sample of (theta, omega) drawn once per solve (common random
// numbers), and replace continuous minimization over actions by a
// distance-ordered search over a per-dimension grid of the action box.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rsf/dynamics.hpp"
#include "rsf/value.hpp"

namespace rsf {

enum class RadiusMode { Fixed, Margin };

std::string_view radius_mode_name(RadiusMode mode) noexcept;

struct FilterConfig {
  double alpha = 0.1;
  double epsilon = 0.0;
  double alpha_bar = 0.5;
  double epsilon_bar = 0.1;
  double beta = 1.0;
  std::size_t samples = 5;
  std::size_t grid = 9;
  RadiusMode radius_mode = RadiusMode::Fixed;
  double radius = 0.05;
  double lipschitz_h = 1.0;
  double lipschitz_fu = 1.0;
  double tolerance = 0.0;
  bool clip_to_box = false;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;

  bool operator==(const FilterConfig&) const = default;
};

enum class Branch { Centralized, Pessimistic, Proximity };

std::string_view branch_name(Branch branch) noexcept;

/// Outcome of a per-agent filter. `margin` is the risk margin achieved at the chosen
/// action; for distributed branches it is the worst case over the other agents' grid.
struct FilterOutcome {
  std::size_t agent = 0;
  std::vector<double> action;
  Branch branch = Branch::Pessimistic;
  bool feasible = false;
  double margin = 0.0;
};

struct JointOutcome {
  JointAction action;
  double margin = 0.0;
};

struct ConditionResult {
  bool satisfied = false;
  double margin = 0.0;
};

/// S joint (theta, omega) draws used by one filter solve.
std::vector<UncertaintySample> draw_risk_samples(const MasModel& model, std::uint64_t seed, std::size_t count);

/// margin = risk_lower({h(f(x, u, omega_s; theta_s))}_s, beta) - alpha h(x) - eps;
/// satisfied iff margin >= tolerance.
ConditionResult check_condition(const MasModel& model, const Barrier& barrier, const JointState& x,
                                const JointAction& u, const FilterConfig& cfg, std::uint64_t seed);
ConditionResult check_condition(const MasModel& model, const Barrier& barrier, const JointState& x,
                                const JointAction& u, const FilterConfig& cfg,
                                std::span<const UncertaintySample> samples);

/// `points` evenly spaced values covering [box.lower, box.upper].
std::vector<double> action_grid(const ActionBox& box, std::size_t points);

/// Joint filter: nearest feasible action to `nominal` among {nominal} and the joint grid.
/// std::nullopt means infeasible.
std::optional<JointOutcome> centralized_filter(const MasModel& model, const Barrier& barrier,
                                               const JointState& x, const JointAction& nominal,
                                               const FilterConfig& cfg, std::uint64_t seed);

/// Worst-case filter for one agent: its action must satisfy the condition for every
/// grid action of all other agents. std::nullopt means infeasible.
std::optional<FilterOutcome> pessimistic_filter(std::size_t agent, const MasModel& model,
                                                const Barrier& barrier, const JointState& x,
                                                const JointAction& nominal, const FilterConfig& cfg,
                                                std::uint64_t seed);

/// Euclidean projection of `point` onto the closed ball of `radius` around `center`.
std::vector<double> project_to_ball(std::span<const double> point, std::span<const double> center,
                                    double radius);

/// Proximity radius: cfg.radius in fixed mode, otherwise
/// ((alpha_bar - alpha) h(x) + eps_bar - eps) / (M L_h L_fu).
/// Throws DomainError if the margin-derived radius is negative.
double proximity_radius(const FilterConfig& cfg, std::size_t agents, double h_x);

/// Stay within the proximity radius of the safe action, as close to nominal as possible.
std::vector<double> proximity_filter(std::size_t agent, const MasModel& model, const Barrier& barrier,
                                     const JointState& x, const JointAction& nominal,
                                     const JointAction& safe, const FilterConfig& cfg);

/// Pessimistic action when feasible, otherwise the proximity action.
FilterOutcome switching_filter(std::size_t agent, const MasModel& model, const Barrier& barrier,
                               const JointState& x, const JointAction& nominal, const JointAction& safe,
                               const FilterConfig& cfg, std::uint64_t seed);

/// Worst-case margin of a fixed action for `agent` over the other agents' grid,
/// under the given samples. Exposed for exhaustive re-checks.
double worst_case_margin(std::size_t agent, const MasModel& model, const Barrier& barrier,
                         const JointState& x, std::span<const double> agent_action,
                         const FilterConfig& cfg, std::span<const UncertaintySample> samples);

}  // namespace rsf
