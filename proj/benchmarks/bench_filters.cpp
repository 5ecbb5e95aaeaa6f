#include <benchmark/benchmark.h>

#include <random>

#include "rsf/filters.hpp"
#include "rsf/policy.hpp"
#include "rsf/risk.hpp"
#include "rsf/value.hpp"

namespace {

using namespace rsf;

// A small fitted value model on the spring preset, shared by the benchmarks.
struct Fixture {
  MasModel model = make_model(Preset::Spring);
  Policy nominal = make_proportional(model, AgentGains{1.0, 0.2});
  Policy safe = make_proportional(model, AgentGains{0.5, 0.5});
  Barrier barrier;
  JointState x;

  Fixture() {
    const auto data = collect_dataset(model, safe, 200, 50, 2, 1, uniform_box_sampler(model, -2.5, 2.5, -3, 3));
    ApproxConfig cfg;
    cfg.epochs = 50;
    barrier = Barrier{std::make_shared<ValueModel>(fit_value(data, cfg, 2)), 5.0};
    x = model.zero_state();
    x(0, 0) = 0.4;
    x(1, 0) = -0.3;
    x(2, 1) = 0.2;
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_EntropicRisk(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (double& v : xs) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(entropic_risk(xs, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EntropicRisk)->Arg(5)->Arg(64)->Arg(1024);

void BM_ValueEval(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.barrier(f.x));
}
BENCHMARK(BM_ValueEval);

void BM_PessimisticFilter(benchmark::State& state) {
  const Fixture& f = fixture();
  FilterConfig cfg;
  cfg.grid = static_cast<std::size_t>(state.range(0));
  const JointAction nominal = eval_policy(f.nominal, f.x);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pessimistic_filter(0, f.model, f.barrier, f.x, nominal, cfg, seed++));
}
BENCHMARK(BM_PessimisticFilter)->Arg(5)->Arg(9)->Arg(21);

void BM_SwitchingFilter(benchmark::State& state) {
  const Fixture& f = fixture();
  FilterConfig cfg;
  cfg.epsilon = state.range(0) ? 10.0 : 0.0;  // 10 forces the proximity branch
  const JointAction nominal = eval_policy(f.nominal, f.x);
  const JointAction safe = eval_policy(f.safe, f.x);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(switching_filter(0, f.model, f.barrier, f.x, nominal, safe, cfg, seed++));
  }
}
BENCHMARK(BM_SwitchingFilter)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
