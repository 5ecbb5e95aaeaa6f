#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rsf/dynamics.hpp"
#include "rsf/filters.hpp"
#include "rsf/policy.hpp"
#include "rsf/value.hpp"

namespace rsf {

/// Failure probability bound for K-step safety:
///   delta = 1 - (1 - exp(-beta (alpha h0 + eps))) (1 - exp(-beta eps))^(K-1).
/// Requires beta > 0, alpha in [0, 1], eps >= 0, K >= 1; h0 < 0 or K == 0 throw DomainError.
double compute_delta(double beta, double alpha, double epsilon, double h0, std::size_t k);

struct StateCertificate {
  std::size_t index = 0;
  double h = 0.0;
  double margin = 0.0;
  bool passed = false;
};

struct GuaranteeReport {
  double beta = 0.0;
  double alpha = 0.0;
  double epsilon = 0.0;
  double h0 = 0.0;
  std::size_t k = 1;
  double delta = 1.0;

  std::vector<StateCertificate> states;  // only states with h(x) >= 0
  std::size_t skipped = 0;               // states outside the sublevel set
  std::size_t passed = 0;
  double pass_fraction = 0.0;
  bool empty_domain = false;             // no state had h(x) >= 0

  double min_margin() const;
};

/// Empirical check of the risk condition for `policy` at each state in the sublevel set,
/// using `oracle_samples` draws per state (seed derived per state index).
GuaranteeReport certify_grid(const MasModel& model, const Barrier& barrier, const Policy& policy,
                             std::span<const JointState> states, const FilterConfig& cfg,
                             std::uint64_t seed, std::size_t oracle_samples);

/// Fills delta, h0 and k of `report` from its (beta, alpha, epsilon).
void attach_delta(GuaranteeReport& report, double h0, std::size_t k);

/// The multi-step bound degenerates to delta = 1 whenever epsilon == 0 and K >= 2.
bool delta_is_vacuous(double epsilon, std::size_t k) noexcept;

}  // namespace rsf
