#include "rsf/experiment.hpp"

#include <ostream>
#include <random>

#include <json.hpp>

#include "rsf/csv.hpp"
#include "rsf/error.hpp"
#include "rsf/guarantees.hpp"

namespace rsf {

std::string_view command_name(Command command) noexcept {
  switch (command) {
    case Command::TrainValue: return "train-value";
    case Command::Run: return "run";
    case Command::SweepBeta: return "sweep-beta";
    case Command::SweepXi: return "sweep-xi";
    case Command::Certify: return "certify";
  }
  return "run";
}

std::optional<Command> parse_command(std::string_view name) noexcept {
  for (Command c : {Command::TrainValue, Command::Run, Command::SweepBeta, Command::SweepXi, Command::Certify}) {
    if (command_name(c) == name) return c;
  }
  return std::nullopt;
}

int exit_code_for(const Error& error) noexcept {
  switch (error.code()) {
    case ErrorCode::Config: return 1;
    case ErrorCode::MissingModel: return 2;
    case ErrorCode::GuaranteeDomain: return 3;
    case ErrorCode::Io: return 4;
    case ErrorCode::Contract: return 1;
  }
  return 1;
}

SeedPlan SeedPlan::from(std::uint64_t base) noexcept {
  return SeedPlan{derive_seed(base, {1}), derive_seed(base, {2}), derive_seed(base, {3}), derive_seed(base, {4}),
                  derive_seed(base, {5})};
}

PolicyPair make_policies(const ExperimentConfig& config, const MasModel& model) {
  const std::size_t m = model.actuated_count();
  std::vector<AgentGains> safe(m, config.policy.safe);
  if (m > 1) {
    for (std::size_t j = 0; j < m; ++j) {
      const double t = 1.0 - 2.0 * static_cast<double>(j) / static_cast<double>(m - 1);
      safe[j].v_ref = config.policy.safe_velocity_spread * t;
    }
  }
  return PolicyPair{make_proportional(model, config.policy.nominal), make_proportional(model, safe)};
}

StateSampler value_state_sampler(const ExperimentConfig& config, const MasModel& model) {
  const auto& v = config.value;
  return uniform_box_sampler(model, v.position_min, v.position_max, v.velocity_min, v.velocity_max);
}

JointState initial_state(const ExperimentConfig& config, const MasModel& model, std::uint64_t rollout_seed) {
  if (!config.initial.random) return model.zero_state();
  const auto& b = config.initial;
  Rng rng = make_rng(derive_seed(rollout_seed, {0x1a17}));
  return uniform_box_sampler(model, b.position_min, b.position_max, b.velocity_min, b.velocity_max)(rng);
}

namespace {

void say(std::ostream* log, const std::string& line) {
  if (log) *log << line << '\n';
}

}  // namespace

ModelBundle train_bundle(const ExperimentConfig& config, std::ostream* log) {
  const MasModel model = config.make_model();
  const SeedPlan seeds = SeedPlan::from(config.seed);
  PolicyPair policies = make_policies(config, model);
  const StateSampler sampler = value_state_sampler(config, model);

  if (config.policy.cem_iterations > 0) {
    CemConfig cem;
    cem.iterations = config.policy.cem_iterations;
    cem.population = config.policy.cem_population;
    cem.elite_fraction = config.policy.cem_elite_fraction;
    cem.horizon = std::min<std::size_t>(config.value.horizon, cem.horizon);
    Rng rng = make_rng(derive_seed(seeds.cem, {0}));
    for (int i = 0; i < 16; ++i) cem.eval_states.push_back(sampler(rng));
    const CemResult improved = cem_improve(model, policies.safe, cem, seeds.cem);
    say(log, "cem: objective " + format_double(improved.initial_objective) + " -> " +
                 format_double(improved.best_objective));
    policies.safe = improved.policy;
  }

  const ValueDataset data = collect_dataset(model, policies.safe, config.value.states, config.value.horizon,
                                            config.value.samples, seeds.dataset, sampler);
  say(log, "train-value: collected " + std::to_string(data.size()) + " states");
  ApproxConfig approx;
  approx.hidden = config.value.hidden;
  approx.epochs = config.value.epochs;
  approx.learning_rate = config.value.learning_rate;
  ModelBundle bundle;
  bundle.value = fit_value(data, approx, seeds.fit, config.model.gamma, config.value.horizon);
  say(log, "train-value: training mse " + format_double(bundle.value.train_mse()));
  bundle.nominal = policies.nominal;
  bundle.safe = policies.safe;
  return bundle;
}

std::filesystem::path resolve_model_path(const ExperimentConfig& config, const RunOptions& options) {
  if (options.model_path) return *options.model_path;
  if (!config.value.model_path.empty()) return config.value.model_path;
  return options.output_dir / kModelFileName;
}

std::shared_ptr<const Controller> make_controller(const ExperimentConfig& config, ControllerKind kind,
                                                  const MasModel& model, const Barrier& barrier,
                                                  const PolicyPair& policies) {
  switch (kind) {
    case ControllerKind::Nominal: return std::make_shared<PolicyController>(policies.nominal);
    case ControllerKind::Centralized:
      return std::make_shared<CentralizedController>(model, barrier, policies.nominal, policies.safe, config.filter);
    case ControllerKind::Switching: break;
  }
  return std::make_shared<SwitchingController>(model, barrier, policies.nominal, policies.safe, config.filter);
}

std::vector<RolloutRecord> run_rollouts(const ExperimentConfig& config, const MasModel& model,
                                        const Controller& controller) {
  std::vector<RolloutRecord> records;
  records.reserve(config.rollouts);
  for (std::size_t r = 0; r < config.rollouts; ++r) {
    const std::uint64_t seed = config.seed + r;
    records.push_back(rollout(model, controller, initial_state(config, model, seed), config.steps, seed));
  }
  return records;
}

namespace {

struct Session {
  const ExperimentConfig& config;
  const RunOptions& options;
  MasModel model;
  RunResult result;
  std::optional<std::filesystem::path> model_file;

  void write(const std::string& name, const std::string& content) {
    const auto path = options.output_dir / name;
    write_text_file(path, content);
    result.files.push_back(path);
  }

  void warn(const std::string& text) {
    result.warnings.push_back(text);
    say(options.log, "warning: " + text);
  }

  struct Loaded {
    Barrier barrier;
    PolicyPair policies;
  };

  // Nominal gains come from the config; the safe policy is the one the value model was trained under.
  Loaded load() {
    const auto path = resolve_model_path(config, options);
    model_file = path;
    ModelBundle bundle = load_bundle(path);
    if (bundle.value.input_dim() != model.agents * model.state_dim) {
      throw ConfigError(ConfigErrorKind::Invalid, "model file '" + path.string() +
                                                      "' was trained for a different joint state dimension");
    }
    PolicyPair policies = make_policies(config, model);
    if (bundle.safe) policies.safe = *bundle.safe;
    return Loaded{Barrier{std::make_shared<const ValueModel>(std::move(bundle.value)), config.xi},
                  std::move(policies)};
  }

  void train() {
    const auto path = resolve_model_path(config, options);
    const ModelBundle bundle = train_bundle(config, options.log);
    write_text_file(path, encode_bundle(bundle));
    model_file = path;
    result.files.push_back(path);
  }

  void run() {
    std::vector<LabeledMetrics> table;
    std::vector<RolloutRecord> records;
    if (config.controller == ControllerKind::Nominal) {
      records = run_rollouts(config, model, PolicyController(make_policies(config, model).nominal));
    } else {
      const Loaded loaded = load();
      const auto controller = make_controller(config, config.controller, model, loaded.barrier, loaded.policies);
      records = run_rollouts(config, model, *controller);
      table.push_back({std::string(controller_kind_name(config.controller)), compute_metrics(records, model)});
    }
    const auto baseline = config.controller == ControllerKind::Nominal
                              ? records
                              : run_rollouts(config, model, PolicyController(make_policies(config, model).nominal));
    table.push_back({"nominal", compute_metrics(baseline, model)});
    for (const auto& row : table) {
      say(options.log, row.label + ": violations " + std::to_string(row.metrics.violations) + "/" +
                           std::to_string(row.metrics.steps) + ", mse " + format_double(row.metrics.mse));
    }
    write("trajectories.csv", trajectories_csv(records));
    write("metrics.csv", metrics_csv(table));
  }

  void sweep_over(SweepAxis axis) {
    const Loaded loaded = load();
    const std::vector<double>& values = axis == SweepAxis::Beta ? config.sweep.beta : config.sweep.xi;
    const ExperimentConfig& cfg = config;
    const MasModel& m = model;
    const ControllerFactory factory = [&](double value) {
      ExperimentConfig local = cfg;
      Barrier barrier = loaded.barrier;
      if (axis == SweepAxis::Beta) local.filter.beta = value;
      else barrier.xi = value;
      SweepSetup setup{m, make_controller(local, local.controller, m, barrier, loaded.policies),
                       [&cfg, &m](std::uint64_t seed) { return initial_state(cfg, m, seed); }};
      return setup;
    };
    const auto rows = sweep(factory, axis, values, config.rollouts, config.steps, config.seed);
    for (const auto& row : rows) {
      say(options.log, std::string(sweep_axis_name(axis)) + " = " + format_double(row.value) + ": violations " +
                           format_double(row.violations_mean) + " +- " + format_double(row.violations_std));
    }
    write("sweep.csv", sweep_csv(rows));
  }

  void certify() {
    const Loaded loaded = load();
    const SeedPlan seeds = SeedPlan::from(config.seed);
    const StateSampler sampler = value_state_sampler(config, model);
    Rng rng = make_rng(seeds.certify_states);
    std::vector<JointState> states;
    states.reserve(config.certify.states);
    for (std::size_t i = 0; i < config.certify.states; ++i) states.push_back(sampler(rng));

    GuaranteeReport report = certify_grid(model, loaded.barrier, loaded.policies.safe, states, config.filter,
                                          seeds.certify, config.certify.oracle_samples);
    write("certify.csv", certify_csv(report));
    const double h0 = loaded.barrier(initial_state(config, model, config.seed));
    attach_delta(report, h0, config.certify.k);
    if (report.empty_domain) warn("no sampled state lies in the sublevel set; the empirical check is empty");
    if (delta_is_vacuous(report.epsilon, report.k)) {
      warn("epsilon = 0 makes the multi-step bound vacuous (delta = 1 for K >= 2); single-step and empirical "
           "results remain informative");
    }
    say(options.log, "certify: delta " + format_double(report.delta) + ", pass fraction " +
                         format_double(report.pass_fraction) + " over " + std::to_string(report.states.size()) +
                         " states");
    write("guarantee.csv", guarantee_csv(report));
  }

  void manifest(Command command) {
    const SeedPlan seeds = SeedPlan::from(config.seed);
    nlohmann::ordered_json j;
    j["artifact"] = "rsf";
    j["version"] = RSF_VERSION;
    j["model_format_version"] = kModelFormatVersion;
    j["command"] = std::string(command_name(command));
    j["seed"] = config.seed;
    j["seeds"] = {{"rollouts_first", config.seed},
                  {"rollouts_count", config.rollouts},
                  {"dataset", seeds.dataset},
                  {"fit", seeds.fit},
                  {"cem", seeds.cem},
                  {"certify_states", seeds.certify_states},
                  {"certify", seeds.certify}};
    j["model_file"] = model_file ? nlohmann::ordered_json(model_file->filename().string()) : nlohmann::ordered_json();
    nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
    for (const auto& f : result.files) outputs.push_back(f.filename().string());
    j["outputs"] = outputs;
    j["warnings"] = result.warnings;
    j["config"] = serialize_config(config);
    write("manifest.json", j.dump(2) + "\n");
  }
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, Command command, const RunOptions& options) {
  std::optional<Session> session;
  try {
    config.validate();
    session.emplace(Session{config, options, config.make_model(), {}, std::nullopt});
    switch (command) {
      case Command::TrainValue: session->train(); break;
      case Command::Run: session->run(); break;
      case Command::SweepBeta: session->sweep_over(SweepAxis::Beta); break;
      case Command::SweepXi: session->sweep_over(SweepAxis::Xi); break;
      case Command::Certify: session->certify(); break;
    }
    session->manifest(command);
    return std::move(session->result);
  } catch (const Error& e) {
    RunResult failed = session ? std::move(session->result) : RunResult{};
    failed.exit_code = exit_code_for(e);
    failed.error = e.what();
    return failed;
  }
}

}  // namespace rsf
