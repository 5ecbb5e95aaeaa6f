#pragma once

// CSV serialization of rollouts, sweeps, metrics and certification reports.
// Every table starts with its header row; floats use the shortest round-trip form.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/guarantees.hpp"
#include "rsf/sim.hpp"

namespace rsf {

inline constexpr std::string_view kTrajectoryHeader = "rollout,step,agent,x1,x2,u,branch,feasible,safe,reward";
inline constexpr std::string_view kSweepHeader =
    "param_name,param_value,violations_mean,violations_std,mse_mean,mse_std,reward_mean,reward_std,feas_rate_mean";
inline constexpr std::string_view kMetricsHeader =
    "label,rollouts,steps,violations,violation_rate,mse,cumulative_reward,filtered_decisions,feasibility_rate,"
    "centralized,pessimistic,proximity";
inline constexpr std::string_view kCertifyHeader = "index,h,margin,passed";
inline constexpr std::string_view kGuaranteeHeader =
    "beta,alpha,epsilon,h0,k,delta,vacuous,states,skipped,passed,pass_fraction,min_margin";

struct LabeledMetrics {
  std::string label;
  Metrics metrics;
};

/// One row per (rollout, step k = 0..T, agent). Action, branch, feasibility and
/// reward are blank at k = T and wherever they do not apply.
std::string trajectories_csv(std::span<const RolloutRecord> records);
std::string sweep_csv(std::span<const SweepRow> rows);
std::string metrics_csv(std::span<const LabeledMetrics> rows);
std::string certify_csv(const GuaranteeReport& report);
std::string guarantee_csv(const GuaranteeReport& report);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace rsf
