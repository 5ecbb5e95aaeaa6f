#pragma once

// Orchestration of the CLI commands: value training, rollouts, sweeps and
// certification, each writing CSV tables plus a manifest into an output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/config.hpp"
#include "rsf/error.hpp"
#include "rsf/model_io.hpp"
#include "rsf/sim.hpp"

namespace rsf {

enum class Command { TrainValue, Run, SweepBeta, SweepXi, Certify };

std::string_view command_name(Command command) noexcept;
std::optional<Command> parse_command(std::string_view name) noexcept;

/// Process exit status for an error: 1 config/contract, 2 missing model, 3 guarantee domain, 4 I/O.
int exit_code_for(const Error& error) noexcept;

inline constexpr std::string_view kModelFileName = "value_model.rsfm";

struct RunOptions {
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> model_path;  // overrides value.model_path
  std::ostream* log = nullptr;                      // progress and warnings
};

struct RunResult {
  int exit_code = 0;
  std::string error;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;
};

/// Never throws for rsf::Error; failures are reported through exit_code and error.
RunResult run_experiment(const ExperimentConfig& config, Command command, const RunOptions& options);

// Building blocks shared by the commands, exposed for tests and benchmarks.

struct PolicyPair {
  Policy nominal;
  Policy safe;
};

/// Sub-seeds of the base seed; rollouts use base + index directly.
struct SeedPlan {
  std::uint64_t dataset;
  std::uint64_t fit;
  std::uint64_t cem;
  std::uint64_t certify_states;
  std::uint64_t certify;

  static SeedPlan from(std::uint64_t base) noexcept;
};

PolicyPair make_policies(const ExperimentConfig& config, const MasModel& model);

StateSampler value_state_sampler(const ExperimentConfig& config, const MasModel& model);

/// Origin, or a uniform draw from the initial box seeded by the rollout seed.
JointState initial_state(const ExperimentConfig& config, const MasModel& model, std::uint64_t rollout_seed);

/// Optionally improves the safe policy by CEM, collects a dataset and fits the value model.
ModelBundle train_bundle(const ExperimentConfig& config, std::ostream* log = nullptr);

std::filesystem::path resolve_model_path(const ExperimentConfig& config, const RunOptions& options);

std::shared_ptr<const Controller> make_controller(const ExperimentConfig& config, ControllerKind kind,
                                                  const MasModel& model, const Barrier& barrier,
                                                  const PolicyPair& policies);

/// `config.rollouts` rollouts with seeds config.seed + index.
std::vector<RolloutRecord> run_rollouts(const ExperimentConfig& config, const MasModel& model,
                                        const Controller& controller);

}  // namespace rsf
