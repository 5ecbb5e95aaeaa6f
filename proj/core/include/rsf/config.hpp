#pragma once

// Experiment configuration: a small sectioned key/value format
// (grammar in docs/config_format.md), resolved against preset defaults.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/dynamics.hpp"
#include "rsf/filters.hpp"
#include "rsf/policy.hpp"

namespace rsf {

enum class ControllerKind { Switching, Centralized, Nominal };

std::string_view controller_kind_name(ControllerKind kind) noexcept;

struct ModelBlock {
  double noise_scale = 0.01;
  double gamma = 0.99;
  double action_min = -1.0;
  double action_max = 1.0;

  bool operator==(const ModelBlock&) const = default;
};

/// Rollout initial states: either the origin or uniform over a box.
struct InitialBlock {
  bool random = false;
  double position_min = -1.0;
  double position_max = 1.0;
  double velocity_min = -0.5;
  double velocity_max = 0.5;

  bool operator==(const InitialBlock&) const = default;
};

struct ValueBlock {
  std::size_t states = 2000;
  std::size_t horizon = 200;
  std::size_t samples = 8;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t epochs = 1500;
  double learning_rate = 5e-3;
  double position_min = -2.5;
  double position_max = 2.5;
  double velocity_min = -3.0;
  double velocity_max = 3.0;
  std::string model_path;

  bool operator==(const ValueBlock&) const = default;
};

struct PolicyBlock {
  AgentGains nominal{1.0, 0.2};
  AgentGains safe{0.5, 0.5};
  // Safe-policy velocity setpoints spread evenly over [-spread, spread] across actuated agents.
  double safe_velocity_spread = 0.0;
  std::size_t cem_iterations = 0;
  std::size_t cem_population = 16;
  double cem_elite_fraction = 0.25;

  bool operator==(const PolicyBlock&) const = default;
};

struct SweepBlock {
  std::vector<double> beta{0.1, 1.0, 10.0};
  std::vector<double> xi{1.0, 2.0, 5.0, 10.0};

  bool operator==(const SweepBlock&) const = default;
};

struct CertifyBlock {
  std::size_t states = 200;
  std::size_t oracle_samples = 200;
  std::size_t k = 10;

  bool operator==(const CertifyBlock&) const = default;
};

struct ExperimentConfig {
  Preset preset = Preset::Spring;
  std::size_t agents = 3;
  std::size_t steps = 200;
  std::size_t rollouts = 20;
  std::uint64_t seed = 0;
  ControllerKind controller = ControllerKind::Switching;

  ModelBlock model;
  InitialBlock initial;
  FilterConfig filter;
  double xi = 5.0;
  ValueBlock value;
  PolicyBlock policy;
  SweepBlock sweep;
  CertifyBlock certify;
  std::string output_dir;  // empty: use --out, $RSF_OUTPUT_DIR, or "rsf_out"

  /// Throws ConfigError(Invalid) when an invariant fails.
  void validate() const;

  MasModel make_model() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults for a preset before any user keys are applied.
ExperimentConfig default_config(Preset preset);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Canonical text form listing every key; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

}  // namespace rsf
