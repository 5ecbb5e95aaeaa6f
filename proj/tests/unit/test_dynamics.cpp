#include <doctest.h>

#include <cmath>

#include "rsf/dynamics.hpp"
#include "rsf/error.hpp"
#include "support/oracles.hpp"

using namespace rsf;

namespace {

JointState spring_positions(double a, double b, double c) {
  return JointState::from_agents({{a, 0.0}, {b, 0.0}, {c, 0.0}});
}

UncertaintySample quiet(const MasModel& m, double theta = 0.0) {
  return UncertaintySample{theta, std::vector<double>(m.agents * m.noise_dim, 0.0)};
}

}  // namespace

TEST_CASE("spring preset has two actuated agents and an unactuated mass") {
  const MasModel m = make_model(Preset::Spring);
  CHECK(m.agents == 3);
  CHECK(m.action_dims == std::vector<std::size_t>{1, 1, 0});
  CHECK(m.noise_scale == 0.01);
  CHECK(m.gamma == 0.99);
  CHECK(m.x_ref == std::vector<double>{1.75, 0.0});
  CHECK(m.weight_u == 0.01);
  CHECK(m.weight_x[0] == std::vector<double>{0.1, 0.0});
  CHECK(m.weight_x[2] == std::vector<double>{1.0, 0.0});
  CHECK(m.box == ActionBox{-1.0, 1.0});
}

TEST_CASE("collision preset") {
  const MasModel m = make_model(Preset::Collision, ModelParams{.agents = 2});
  CHECK(m.agents == 2);
  CHECK(m.actuated_count() == 2);
  CHECK(m.noise_scale == 0.1);
  CHECK(m.weight_u == 0.1);
  CHECK(m.weight_x[1] == std::vector<double>{1.0, 0.1});
  CHECK(m.x_ref == std::vector<double>{0.0, 0.0});
  CHECK(make_model("collision", ModelParams{.agents = 5}).agents == 5);
}

TEST_CASE("make_model rejects bad presets and sizes") {
  CHECK_THROWS_AS(make_model("pendulum"), ConfigError);
  CHECK_THROWS_AS(make_model(Preset::Collision, ModelParams{.agents = 1}), ConfigError);
  CHECK_THROWS_AS(make_model(Preset::Spring, ModelParams{.agents = 4}), ConfigError);
  CHECK_THROWS_AS(make_model(Preset::Spring, ModelParams{.noise_scale = -1.0}), ConfigError);
  CHECK_THROWS_AS(make_model(Preset::Spring, ModelParams{.box = ActionBox{1.0, -1.0}}), ConfigError);
  try {
    make_model("pendulum");
  } catch (const ConfigError& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}

TEST_CASE("spring step by hand") {
  const MasModel m = make_model(Preset::Spring);
  JointAction u = m.zero_action();
  u.agents[0] = {0.1};
  u.agents[1] = {0.1};
  const JointState next = step(m, m.zero_state(), u, quiet(m));
  // x2' = 0 + 0.1 * (5 * 0.1) - 0.1 * sin(psi(0)) = 0.05
  CHECK(next(0, 0) == 0.0);
  CHECK(next(0, 1) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(next(1, 1) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(next(2, 0) == 0.0);
  CHECK(next(2, 1) == 0.0);
}

TEST_CASE("spring coupling and saturation") {
  const MasModel m = make_model(Preset::Spring);
  const JointState x = JointState::from_agents({{0.5, 3.0}, {-0.2, 0.0}, {0.1, -0.4}});
  const JointAction u{{{0.3}, {-0.6}, {}}};
  const double theta = 1.3;
  const JointState next = step(m, x, u, quiet(m, theta));
  const double e1 = 0.5 - 0.1;
  const double e2 = -0.2 - 0.1;
  const double c = 0.5 * theta * theta;
  CHECK(next(0, 0) == doctest::Approx(0.5 + 0.3));
  CHECK(next(0, 1) == doctest::Approx(3.0 + 0.1 * (5 * 0.3 - c * e1) - 0.1 * std::sin(1.0)));
  CHECK(next(1, 1) == doctest::Approx(0.1 * (5 * -0.6 - c * e2)));
  CHECK(next(2, 1) == doctest::Approx(-0.4 + 0.1 * c * (e1 + e2) - 0.1 * std::sin(-0.4)));
}

TEST_CASE("collision step by hand") {
  const MasModel m = make_model(Preset::Collision, ModelParams{.agents = 2});
  const JointState x = JointState::from_agents({{1.0, 0.5}, {1.0, 0.0}});
  JointAction u{{{0.2}, {0.0}}};
  JointState next = step(m, x, u, quiet(m));
  CHECK(next(0, 0) == doctest::Approx(1.005).epsilon(1e-15));
  CHECK(next(0, 1) == doctest::Approx(0.7).epsilon(1e-15));

  next = step(m, x, u, quiet(m, 0.5));
  CHECK(next(1, 0) == doctest::Approx(1.42074).epsilon(1e-5));
  CHECK(next(1, 0) == doctest::Approx(1.0 + 0.5 * std::sin(1.0)).epsilon(1e-15));
  CHECK(next(1, 1) == 0.0);
}

TEST_CASE("noise enters additively") {
  const MasModel m = make_model(Preset::Collision, ModelParams{.agents = 2});
  UncertaintySample s = quiet(m);
  s.noise = {0.01, -0.02, 0.03, 0.04};
  const JointState next = step(m, m.zero_state(), m.zero_action(), s);
  CHECK(next(0, 0) == 0.01);
  CHECK(next(0, 1) == -0.02);
  CHECK(next(1, 0) == 0.03);
  CHECK(next(1, 1) == 0.04);
}

TEST_CASE("step rejects mismatched shapes") {
  const MasModel m = make_model(Preset::Spring);
  CHECK_THROWS_AS(step(m, JointState(2, 2), m.zero_action(), quiet(m)), ContractError);
  JointAction bad = m.zero_action();
  bad.agents[2] = {0.1};
  CHECK_THROWS_AS(step(m, m.zero_state(), bad, quiet(m)), ContractError);
  UncertaintySample short_noise{0.0, {0.0}};
  CHECK_THROWS_AS(step(m, m.zero_state(), m.zero_action(), short_noise), ContractError);
}

TEST_CASE("step is deterministic and the spring origin is a fixed point") {
  const MasModel m = make_model(Preset::Spring);
  const UncertaintySample s = sample_uncertainty(m, 42);
  const JointState x = spring_positions(0.3, -0.7, 1.1);
  JointAction u{{{0.25}, {-0.5}, {}}};
  CHECK(step(m, x, u, s) == step(m, x, u, s));
  CHECK(step(m, m.zero_state(), m.zero_action(), quiet(m)) == m.zero_state());
}

TEST_CASE("sample_uncertainty") {
  const MasModel m = make_model(Preset::Collision, ModelParams{.agents = 3});
  const auto a = sample_uncertainty(m, 7);
  const auto b = sample_uncertainty(m, 7);
  CHECK(a.theta == b.theta);
  CHECK(a.noise == b.noise);
  CHECK(a.noise.size() == 6);
  CHECK(sample_uncertainty(m, 8).theta != a.theta);

  Rng rng = make_rng(123);
  double sum = 0.0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) sum += sample_uncertainty(m, rng).theta;
  CHECK(std::abs(sum / kDraws) < 0.02);

  const MasModel silent = make_model(Preset::Collision, ModelParams{.agents = 2, .noise_scale = 0.0});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (double w : sample_uncertainty(silent, seed).noise) CHECK(w == 0.0);
  }
}

TEST_CASE("resample_noise keeps theta") {
  const MasModel m = make_model(Preset::Spring);
  Rng rng = make_rng(5);
  UncertaintySample s = sample_uncertainty(m, rng);
  const double theta = s.theta;
  const auto before = s.noise;
  resample_noise(m, rng, s);
  CHECK(s.theta == theta);
  CHECK(s.noise != before);
}

TEST_CASE("safe sets") {
  const MasModel spring = make_model(Preset::Spring);
  CHECK(is_safe(spring, spring_positions(1.9, 1.9, 1.9)));
  CHECK_FALSE(is_safe(spring, spring_positions(1.9, 2.1, 1.9)));
  CHECK(is_safe(spring, spring_positions(-2.0, 2.0, 0.0)));
  CHECK(agent_safety(spring, spring_positions(0.0, -2.5, 0.0)) == std::vector<bool>{true, false, true});

  const MasModel col = make_model(Preset::Collision, ModelParams{.agents = 2});
  CHECK_FALSE(is_safe(col, JointState::from_agents({{0.0, 0.0}, {0.1, 0.0}})));
  CHECK(is_safe(col, JointState::from_agents({{0.0, 0.0}, {0.2, 0.0}})));
}

TEST_CASE("collision safety is invariant under agent permutation") {
  const MasModel col = make_model(Preset::Collision, ModelParams{.agents = 3});
  Rng rng = make_rng(9);
  std::uniform_real_distribution<double> pos(-0.6, 0.6);
  for (int t = 0; t < 500; ++t) {
    const double a = pos(rng), b = pos(rng), c = pos(rng);
    const bool ref = is_safe(col, JointState::from_agents({{a, 0}, {b, 0}, {c, 0}}));
    CHECK(is_safe(col, JointState::from_agents({{b, 0}, {c, 0}, {a, 0}})) == ref);
    CHECK(is_safe(col, JointState::from_agents({{c, 0}, {a, 0}, {b, 0}})) == ref);
    CHECK(is_safe(col, JointState::from_agents({{a, 0}, {c, 0}, {b, 0}})) == ref);
  }
}

TEST_CASE("cost values") {
  const MasModel spring = make_model(Preset::Spring);
  CHECK(cost(spring, spring.zero_state()) < 1e-12);
  CHECK(cost(spring, spring_positions(2.0, 2.0, 2.0)) == doctest::Approx(0.5).epsilon(1e-15));

  const MasModel col = make_model(Preset::Collision, ModelParams{.agents = 2});
  const double coincident = cost(col, JointState::from_agents({{0.3, 0.0}, {0.3, 1.0}}));
  CHECK(coincident == doctest::Approx(1.0 / (1.0 + std::exp(-0.4))).epsilon(1e-15));
  CHECK(coincident == doctest::Approx(0.59869).epsilon(1e-5));
}

TEST_CASE("cost lies in [0, 1] and counts clear violations") {
  for (std::size_t agents : {2u, 3u}) {
    const MasModel m = agents == 3 ? make_model(Preset::Spring) : make_model(Preset::Collision, ModelParams{.agents = 2});
    Rng rng = make_rng(agents);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    for (int t = 0; t < 2000; ++t) {
      JointState x(m.agents, 2);
      for (std::size_t i = 0; i < m.agents; ++i) x(i, 0) = pos(rng);
      const double c = cost(m, x);
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      // Count agents whose constraint is crossed by more than the sigmoid width 0.1.
      std::size_t clear = 0;
      for (std::size_t i = 0; i < m.agents; ++i) {
        if (m.preset == Preset::Spring) {
          clear += 4.0 - x(i, 0) * x(i, 0) < -0.1;
        } else {
          double dmin = INFINITY;
          for (std::size_t j = 0; j < m.agents; ++j) {
            if (j != i) dmin = std::min(dmin, (x(i, 0) - x(j, 0)) * (x(i, 0) - x(j, 0)));
          }
          clear += 0.04 - dmin > 0.1;
        }
      }
      if (clear > 0) CHECK(c > 0.5 * static_cast<double>(clear) / static_cast<double>(m.agents));
    }
  }
}

TEST_CASE("reward") {
  const MasModel spring = make_model(Preset::Spring);
  JointState at_ref(3, 2);
  for (std::size_t i = 0; i < 3; ++i) at_ref(i, 0) = 1.75;
  CHECK(reward(spring, at_ref, spring.zero_action()) == 1.0);
  CHECK(reward(spring, spring.zero_state(), spring.zero_action()) ==
        doctest::Approx(std::exp(-(0.1 + 0.1 + 1.0) * 1.75 * 1.75)).epsilon(1e-14));
  CHECK(reward(spring, spring.zero_state(), spring.zero_action()) == doctest::Approx(std::exp(-3.675)).epsilon(1e-14));

  const JointState x = spring_positions(0.4, -0.3, 1.0);
  double prev = 2.0;
  for (double a = 0.0; a <= 1.0; a += 0.1) {
    const double r = reward(spring, x, JointAction{{{a}, {a}, {}}});
    CHECK(r < prev);
    CHECK(r > 0.0);
    CHECK(r <= 1.0);
    prev = r;
  }
}

TEST_CASE("sigm10 and saturate") {
  CHECK(sigm10(0.0) == 0.5);
  CHECK(sigm10(4.0) == doctest::Approx(1.0 / (1.0 + std::exp(-40.0))));
  CHECK(saturate(0.3) == 0.3);
  CHECK(saturate(2.0) == 1.0);
  CHECK(saturate(-7.0) == -1.0);
}

TEST_CASE("joint state helpers") {
  JointState x(2, 2, {1.0, 2.0, 3.0, 4.0});
  CHECK(x(1, 0) == 3.0);
  CHECK(x.agent(0)[1] == 2.0);
  CHECK(x.all_finite());
  x(0, 0) = NAN;
  CHECK_FALSE(x.all_finite());
  CHECK_THROWS_AS(JointState(2, 2, {1.0}), ContractError);
  const JointAction a{{{1.0}, {2.0}}};
  const JointAction b{{{0.0}, {0.0}}};
  CHECK(a.squared_norm() == 5.0);
  CHECK(a.squared_distance(b) == 5.0);
}
