// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "rsf/config.hpp"
#include "rsf/experiment.hpp"
#include "rsf/guarantees.hpp"
#include "rsf/risk.hpp"
#include "support/oracles.hpp"

using namespace rsf;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) detail << "first failure: " << why << "; ";
    pass = pass && ok;
  }
};

int failures = 0;

void report(int id, const std::string& name, Verdict& v, Clock::time_point start) {
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("%s %d %s (%.1fs) %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), secs, v.detail.str().c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Trained bundles shared between criteria.
struct Trained {
  ExperimentConfig config;
  MasModel model;
  ModelBundle bundle;
  Barrier barrier;
  PolicyPair policies;
};

Trained train(Preset preset) {
  Trained t;
  t.config = default_config(preset);
  t.model = t.config.make_model();
  t.bundle = train_bundle(t.config);
  t.barrier = Barrier{std::make_shared<ValueModel>(t.bundle.value), t.config.xi};
  t.policies = make_policies(t.config, t.model);
  if (t.bundle.safe) t.policies.safe = *t.bundle.safe;
  return t;
}

void criterion_risk() {
  const auto start = Clock::now();
  Verdict v;
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> size(2, 64);
  std::uniform_real_distribution<double> value(-10.0, 10.0);
  const double betas[] = {0.01, 0.1, 1.0, 10.0, 100.0};
  double worst_shift = 0.0;
  double worst_small = 0.0;
  for (int set = 0; set < 1000; ++set) {
    std::vector<double> xs(static_cast<std::size_t>(size(rng)));
    for (double& x : xs) x = value(rng);
    const double mean = test::mean_of(xs);
    const double max = *std::max_element(xs.begin(), xs.end());
    const double c = value(rng);
    std::vector<double> shifted = xs;
    for (double& x : shifted) x += c;

    double prev = -INFINITY;
    for (double beta : betas) {
      const double r = entropic_risk(xs, beta);
      v.require(r >= mean - 1e-12 && r <= max + 1e-12, "mean <= R <= max");
      v.require(r >= prev - 1e-12, "monotone in beta");
      prev = r;
      const double shift_err = std::abs(entropic_risk(shifted, beta) - (r + c));
      worst_shift = std::max(worst_shift, shift_err);
      v.require(shift_err <= 1e-9, "translation equivariance");
    }
    const double small_err = std::abs(entropic_risk(xs, 1e-8) - mean);
    worst_small = std::max(worst_small, small_err);
    v.require(small_err <= 1e-6, "beta = 1e-8 vs mean");
  }
  v.require(seconds_since(start) < 10.0, "runtime < 10 s");
  v.detail << "max translation error " << worst_shift << ", max small-beta error " << worst_small;
  report(1, "risk operator laws", v, start);
}

void criterion_delta() {
  const auto start = Clock::now();
  Verdict v;
  for (double beta : {0.1, 1.0, 7.0}) {
    for (double h0 : {0.0, 0.5, 3.0}) {
      v.require(compute_delta(beta, 0.1, 0.2, h0, 1) == std::exp(-beta * (0.1 * h0 + 0.2)), "K = 1 closed form");
      for (std::size_t k : {2u, 3u, 10u, 1000u}) v.require(compute_delta(beta, 0.1, 0.0, h0, k) == 1.0, "eps = 0");
    }
  }
  // Hand arithmetic: 1 - (1 - e^-0.7)(1 - e^-0.5)^2.
  const long double hand = 1.0L - (1.0L - std::exp(-0.7L)) * std::pow(1.0L - std::exp(-0.5L), 2);
  const double d = compute_delta(1.0, 0.1, 0.5, 2.0, 3);
  v.require(std::abs(d - 0.92206) <= 1e-5, "0.92206 example");
  v.require(std::abs(static_cast<long double>(d) - hand) <= 1e-5L, "hand arithmetic");
  double prev = 2.0;
  for (int i = 0; i < 20; ++i) {
    const double beta = 0.05 + 0.5 * i;
    const double di = compute_delta(beta, 0.1, 0.5, 2.0, 3);
    v.require(di <= prev, "nonincreasing in beta");
    prev = di;
  }
  v.detail << "delta(1, 0.1, 0.5, 2, 3) = " << d;
  report(2, "delta formula", v, start);
}

void criterion_pessimistic_grid(const Trained& spring) {
  const auto start = Clock::now();
  Verdict v;
  FilterConfig cfg = spring.config.filter;
  cfg.grid = 5;
  const auto grid = action_grid(spring.model.box, cfg.grid);
  const StateSampler sampler = value_state_sampler(spring.config, spring.model);
  Rng rng(derive_seed(77, {3}));
  std::size_t states = 0, draws = 0, feasible = 0, checked = 0;
  while (states < 50 && draws < 100000) {
    ++draws;
    const JointState x = sampler(rng);
    if (spring.barrier(x) < 0.0) continue;
    ++states;
    const JointAction nominal = eval_policy(spring.policies.nominal, x);
    for (std::size_t agent = 0; agent < spring.model.agents; ++agent) {
      if (!spring.model.actuated(agent)) continue;
      const std::uint64_t seed = derive_seed(500, {states, agent});
      const auto out = pessimistic_filter(agent, spring.model, spring.barrier, x, nominal, cfg, seed);
      if (!out) continue;
      ++feasible;
      const auto samples = draw_risk_samples(spring.model, seed, cfg.samples);
      for (const JointAction& u : test::all_other_combinations(spring.model, agent, out->action, grid)) {
        ++checked;
        v.require(check_condition(spring.model, spring.barrier, x, u, cfg, samples).satisfied,
                  "re-enumerated combination violates the condition");
      }
    }
  }
  v.require(states == 50, "50 sublevel-set states found");
  v.require(feasible > 0, "at least one feasible pessimistic output");
  v.require(seconds_since(start) < 120.0, "runtime < 2 min");
  v.detail << states << " states, " << feasible << " feasible agent decisions, " << checked
           << " joint combinations re-checked";
  report(3, "pessimistic grid guarantee", v, start);
}

void criterion_proximity() {
  const auto start = Clock::now();
  Verdict v;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> far(-3.0, 3.0);
  std::uniform_real_distribution<double> rad(0.0, 1.0);
  double worst_radius = 0.0;
  double worst_gap = 0.0;
  const Barrier b = test::constant_barrier(1.0);
  for (int n = 0; n < 10000; ++n) {
    const std::size_t dim = 1 + static_cast<std::size_t>(n % 4);
    const MasModel m = test::make_static_model(1, dim);
    FilterConfig cfg;
    cfg.radius = rad(rng);
    JointAction safe{{std::vector<double>(dim)}};
    JointAction nominal{{std::vector<double>(dim)}};
    for (std::size_t k = 0; k < dim; ++k) {
      safe.agents[0][k] = coord(rng);
      nominal.agents[0][k] = far(rng);
    }
    std::vector<double> out;
    try {
      out = proximity_filter(0, m, b, m.zero_state(), nominal, safe, cfg);
    } catch (const std::exception& e) {
      v.require(false, std::string("proximity threw: ") + e.what());
      continue;
    }
    v.require(out.size() == dim && std::all_of(out.begin(), out.end(), [](double c) { return std::isfinite(c); }),
              "finite action");
    const double excess = test::distance(out, safe.agents[0]) - cfg.radius;
    worst_radius = std::max(worst_radius, excess);
    v.require(excess <= 1e-12, "within radius");
    const double searched = test::ball_search_distance(nominal.agents[0], safe.agents[0], cfg.radius, rng);
    const double gap = std::abs(test::distance(out, nominal.agents[0]) - searched);
    worst_gap = std::max(worst_gap, gap);
    v.require(gap <= 1e-6, "matches dense search");
  }
  v.detail << "max radius excess " << worst_radius << ", max search gap " << worst_gap;
  report(4, "proximity filter", v, start);
}

// Fuzzed states inside the sublevel set; every switching call must return an action and a flag.
void fuzz_switching(const Trained& t, std::size_t count, std::uint64_t seed, const FilterConfig& cfg,
                    std::array<std::size_t, 3>& branches, std::size_t& failures_out, std::size_t& sampled) {
  Rng rng(seed);
  const StateSampler sampler = value_state_sampler(t.config, t.model);
  std::size_t draws = 0;
  sampled = 0;
  while (sampled < count && draws < 100 * count) {
    ++draws;
    const JointState x = sampler(rng);
    if (t.barrier(x) < 0.0) continue;
    ++sampled;
    const JointAction nominal = eval_policy(t.policies.nominal, x);
    const JointAction safe = eval_policy(t.policies.safe, x);
    for (std::size_t agent = 0; agent < t.model.agents; ++agent) {
      if (!t.model.actuated(agent)) continue;
      try {
        const FilterOutcome out =
            switching_filter(agent, t.model, t.barrier, x, nominal, safe, cfg, derive_seed(seed, {sampled, agent}));
        if (out.action.size() != t.model.action_dims[agent]) ++failures_out;
        ++branches[static_cast<std::size_t>(out.branch)];
      } catch (const std::exception&) {
        ++failures_out;
      }
    }
  }
}

void criterion_switching(const Trained& spring, const Trained& collision) {
  const auto start = Clock::now();
  Verdict v;
  for (const Trained* t : {&spring, &collision}) {
    const std::string name(preset_name(t->model.preset));
    std::array<std::size_t, 3> branches{};
    std::size_t fails = 0, states = 0;
    fuzz_switching(*t, 10000, 9000, t->config.filter, branches, fails, states);
    v.require(states == 10000, name + ": 10^4 sublevel-set states");
    v.require(fails == 0, name + ": switching failures");

    FilterConfig hard = t->config.filter;
    hard.epsilon = 10.0;
    std::array<std::size_t, 3> forced{};
    std::size_t hard_fails = 0, hard_states = 0;
    fuzz_switching(*t, 10000, 9100, hard, forced, hard_fails, hard_states);
    v.require(hard_fails == 0 && forced[0] == 0 && forced[1] == 0 && forced[2] > 0,
              name + ": eps = 10 gives only proximity");
    v.detail << name << " pessimistic/proximity " << branches[1] << "/" << branches[2] << "; ";
  }

  const MasModel st = test::make_static_model(3);
  const Barrier one = test::constant_barrier(1.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t pessimistic = 0;
  for (int n = 0; n < 10000; ++n) {
    JointState x = st.zero_state();
    for (double& c : x.flat()) c = 5.0 * u(rng);
    JointAction nominal = st.zero_action();
    JointAction safe = st.zero_action();
    for (std::size_t i = 0; i < 3; ++i) {
      nominal.agents[i][0] = u(rng);
      safe.agents[i][0] = u(rng);
    }
    const auto out = switching_filter(n % 3, st, one, x, nominal, safe, FilterConfig{}, static_cast<std::uint64_t>(n));
    if (out.branch == Branch::Pessimistic) ++pessimistic;
  }
  v.require(pessimistic == 10000, "static dynamics gives only pessimistic");
  v.detail << "static pessimistic " << pessimistic << "/10000";
  report(5, "switching filter well-defined", v, start);
}

void criterion_spring_trajectories(const Trained& spring, double train_seconds) {
  const auto start = Clock::now();
  Verdict v;
  const ExperimentConfig& c = spring.config;
  const auto filtered_ctl = make_controller(c, ControllerKind::Switching, spring.model, spring.barrier, spring.policies);
  const auto nominal_ctl = make_controller(c, ControllerKind::Nominal, spring.model, spring.barrier, spring.policies);
  const auto filtered = run_rollouts(c, spring.model, *filtered_ctl);
  const auto nominal = run_rollouts(c, spring.model, *nominal_ctl);
  const Metrics mf = compute_metrics(filtered, spring.model);
  const Metrics mn = compute_metrics(nominal, spring.model);
  v.require(c.rollouts == 20 && c.steps == 200, "20 rollouts of 200 steps");
  v.require(mn.violation_rate > 0.0, "nominal violates");
  v.require(mf.violation_rate <= 0.5 * mn.violation_rate, "filtered <= 50% of nominal");
  v.require(seconds_since(start) + train_seconds < 300.0, "runtime < 5 min");
  v.detail << "violation rate filtered " << mf.violation_rate << " vs nominal " << mn.violation_rate
           << ", pessimistic feasibility " << mf.feasibility_rate << ", training " << train_seconds << "s";
  report(6, "spring filtered vs nominal", v, start);
}

void criterion_beta_trend(const Trained& collision, double train_seconds) {
  const auto start = Clock::now();
  Verdict v;
  const ExperimentConfig base = collision.config;
  const ControllerFactory factory = [&](double beta) {
    ExperimentConfig c = base;
    c.filter.beta = beta;
    SweepSetup s{collision.model, make_controller(c, ControllerKind::Switching, collision.model, collision.barrier,
                                                  collision.policies),
                 {}};
    s.initial_state = [c, model = collision.model](std::uint64_t seed) { return initial_state(c, model, seed); };
    return s;
  };
  const std::vector<double> betas{0.1, 1.0, 10.0};
  const auto rows = sweep(factory, SweepAxis::Beta, betas, 10, base.steps, base.seed);
  int inversions = 0;
  bool small = true;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double rise = rows[i + 1].violations_mean - rows[i].violations_mean;
    if (rise > 0.0) {
      ++inversions;
      small = small && rise < std::max(rows[i].violations_std, rows[i + 1].violations_std);
    }
  }
  v.require(base.agents == 2, "M = 2");
  v.require(inversions == 0 || (inversions == 1 && small), "non-increasing trend");
  v.require(seconds_since(start) + train_seconds < 300.0, "runtime < 5 min");
  for (const auto& r : rows) v.detail << "beta " << r.value << ": " << r.violations_mean << " +- " << r.violations_std << "; ";
  report(7, "collision violations vs beta", v, start);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" RSF_CLI_PATH "\" " + args + " -q";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_mc_and_determinism() {
  const auto start = Clock::now();
  Verdict v;
  double worst = 0.0;
  for (double gamma : {0.5, 0.9, 0.99, 0.999}) {
    const MasModel m = test::make_unit_cost_model(gamma);
    const Policy p = make_proportional(m, AgentGains{});
    for (std::size_t h : {1u, 10u, 200u, 1000u}) {
      const double mc = mc_cost_to_go(m, p, m.zero_state(), h, 3, 17);
      const long double closed = (gamma - std::pow(static_cast<long double>(gamma), h + 1)) / (1.0L - gamma);
      const double err = std::abs(static_cast<long double>(mc) - closed);
      worst = std::max(worst, err);
      v.require(err <= 1e-9, "geometric sum");
    }
  }

  const fs::path root = fs::temp_directory_path() / "rsf_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "pipeline.cfg";
  std::ofstream(cfg) << "preset = \"collision\"\nsteps = 60\nrollouts = 3\n"
                        "[value]\nstates = 300\nhorizon = 60\nepochs = 200\n"
                        "[policy]\ncem_iterations = 2\ncem_population = 6\n"
                        "[certify]\nstates = 40\noracle_samples = 50\n";
  std::size_t compared = 0;
  for (const char* dir : {"a", "b"}) {
    const std::string common = " --config \"" + cfg.string() + "\" --seed 11 --out \"" + (root / dir).string() + "\"";
    for (const char* cmd : {"train-value", "run", "sweep-beta"}) {
      v.require(run_cli(std::string(cmd) + common) == 0, std::string("cli ") + cmd + " succeeded");
    }
  }
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const fs::path other = root / "b" / entry.path().filename();
    v.require(fs::exists(other) && slurp(entry.path()) == slurp(other),
              "byte-identical " + entry.path().filename().string());
    ++compared;
  }
  v.require(compared >= 5, "all artifacts present");
  fs::remove_all(root);
  v.detail << "max geometric-sum error " << worst << ", " << compared << " CLI artifacts byte-identical";
  report(8, "monte carlo sanity and determinism", v, start);
}

}  // namespace

int main() {
  // Both value models are trained up front; training time counts toward criteria 6 and 7.
  auto t0 = Clock::now();
  const Trained spring = train(Preset::Spring);
  const double spring_train = seconds_since(t0);
  t0 = Clock::now();
  const Trained collision = train(Preset::Collision);
  const double collision_train = seconds_since(t0);

  criterion_risk();
  criterion_delta();
  criterion_pessimistic_grid(spring);
  criterion_proximity();
  criterion_switching(spring, collision);
  criterion_spring_trajectories(spring, spring_train);
  criterion_beta_trend(collision, collision_train);
  criterion_mc_and_determinism();

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
