#include "rsf/guarantees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsf/error.hpp"

namespace rsf {

double compute_delta(double beta, double alpha, double epsilon, double h0, std::size_t k) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ContractError("delta: beta must be finite and > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("delta: alpha must lie in [0, 1]");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ContractError("delta: epsilon must be finite and >= 0");
  if (k == 0) throw DomainError("delta: K must be >= 1");
  if (!(h0 >= 0.0)) throw DomainError("delta: h(x0) < 0, initial state outside the guaranteed region");

  const double first = beta * (alpha * h0 + epsilon);
  if (k == 1) return std::exp(-first);
  const double stay_first = -std::expm1(-first);
  const double stay_next = -std::expm1(-beta * epsilon);
  return 1.0 - stay_first * std::pow(stay_next, static_cast<double>(k - 1));
}

bool delta_is_vacuous(double epsilon, std::size_t k) noexcept { return epsilon == 0.0 && k >= 2; }

double GuaranteeReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : states) m = std::min(m, s.margin);
  return m;
}

GuaranteeReport certify_grid(const MasModel& model, const Barrier& barrier, const Policy& policy,
                             std::span<const JointState> states, const FilterConfig& cfg,
                             std::uint64_t seed, std::size_t oracle_samples) {
  if (states.empty()) throw ContractError("certify: empty state list");
  if (oracle_samples == 0) throw ContractError("certify: oracle sample count must be >= 1");
  cfg.validate();

  GuaranteeReport report;
  report.beta = cfg.beta;
  report.alpha = cfg.alpha;
  report.epsilon = cfg.epsilon;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const JointState& x = states[i];
    const double h = barrier(x);
    if (!(h >= 0.0)) {
      ++report.skipped;
      continue;
    }
    const auto samples = draw_risk_samples(model, derive_seed(seed, {i}), oracle_samples);
    const auto result = check_condition(model, barrier, x, eval_policy(policy, x), cfg, samples);
    report.states.push_back({i, h, result.margin, result.satisfied});
    if (result.satisfied) ++report.passed;
  }
  report.empty_domain = report.states.empty();
  report.pass_fraction =
      report.empty_domain ? 0.0 : static_cast<double>(report.passed) / static_cast<double>(report.states.size());
  return report;
}

void attach_delta(GuaranteeReport& report, double h0, std::size_t k) {
  report.h0 = h0;
  report.k = k;
  report.delta = compute_delta(report.beta, report.alpha, report.epsilon, h0, k);
}

}  // namespace rsf
