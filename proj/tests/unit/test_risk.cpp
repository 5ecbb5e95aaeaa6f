#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rsf/error.hpp"
#include "rsf/risk.hpp"
#include "support/oracles.hpp"

using namespace rsf;

TEST_CASE("entropic risk of a constant is the constant") {
  const std::vector<double> c(7, 3.25);
  for (double beta : {0.0, 1e-8, 0.01, 1.0, 10.0, 100.0, 1e4}) {
    CHECK(entropic_risk(c, beta) == doctest::Approx(3.25).epsilon(1e-15));
    CHECK(risk_lower(c, beta) == doctest::Approx(3.25).epsilon(1e-15));
  }
}

TEST_CASE("entropic risk by hand") {
  const std::vector<double> v{0.0, 1.0};
  CHECK(entropic_risk(v, 1.0) == doctest::Approx(std::log((1.0 + std::exp(1.0)) / 2.0)).epsilon(1e-15));
  CHECK(entropic_risk(v, 1.0) == doctest::Approx(0.62011).epsilon(1e-5));
  CHECK(std::abs(entropic_risk(v, 100.0) - 1.0) < 0.01);
  CHECK(risk_lower(v, 1.0) == doctest::Approx(-std::log((1.0 + std::exp(-1.0)) / 2.0)).epsilon(1e-15));
  CHECK(risk_lower(v, 1.0) == doctest::Approx(0.37989).epsilon(1e-5));
  CHECK(std::abs(risk_lower(v, 1e-8) - 0.5) <= 1e-6);
}

TEST_CASE("beta = 0 is the sample mean") {
  const std::vector<double> v{-2.0, 0.5, 4.0, 1.5};
  CHECK(entropic_risk(v, 0.0) == doctest::Approx(1.0));
  CHECK(risk_lower(v, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("contract errors") {
  const std::vector<double> empty;
  const std::vector<double> v{1.0, 2.0};
  CHECK_THROWS_AS(entropic_risk(empty, 1.0), ContractError);
  CHECK_THROWS_AS(risk_lower(empty, 1.0), ContractError);
  CHECK_THROWS_AS(entropic_risk(v, -0.5), ContractError);
  CHECK_THROWS_AS(entropic_risk(v, INFINITY), ContractError);
  CHECK_THROWS_AS(entropic_risk(std::vector<double>{1.0, NAN}, 1.0), ContractError);
  CHECK_THROWS_AS(risk_lower(std::vector<double>{INFINITY}, 1.0), ContractError);
}

TEST_CASE("no overflow at beta * max = 700 and beyond") {
  const std::vector<double> v{7.0, 6.0, -3.0};
  const double r = entropic_risk(v, 100.0);
  CHECK(std::isfinite(r));
  CHECK(r == doctest::Approx(static_cast<double>(test::naive_entropic(v, 100.0L))).epsilon(1e-12));
  const std::vector<double> big{10.0, 9.0};
  CHECK(std::isfinite(entropic_risk(big, 1000.0)));
  CHECK(std::isfinite(risk_lower(std::vector<double>{-10.0, 9.0}, 1000.0)));
}

TEST_CASE("laws over random sample sets") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(2, 64);
  std::uniform_real_distribution<double> value(-10.0, 10.0);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  const double betas[] = {0.01, 0.1, 1.0, 10.0, 100.0};
  for (int t = 0; t < 300; ++t) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (double& x : v) x = value(rng);
    const double mean = test::mean_of(v);
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    const double c = shift(rng);
    std::vector<double> shifted = v;
    for (double& x : shifted) x += c;

    double prev_upper = -INFINITY;
    double prev_lower = INFINITY;
    for (double beta : betas) {
      const double up = entropic_risk(v, beta);
      const double low = risk_lower(v, beta);
      CHECK(up == doctest::Approx(static_cast<double>(test::naive_entropic(v, beta))).epsilon(1e-11));
      CHECK(low == doctest::Approx(static_cast<double>(test::naive_lower(v, beta))).epsilon(1e-11));
      CHECK(up >= mean - 1e-12);
      CHECK(up <= hi);
      CHECK(low >= lo);
      CHECK(low <= mean + 1e-12);
      CHECK(up >= prev_upper - 1e-12);
      CHECK(low <= prev_lower + 1e-12);
      CHECK(std::abs(entropic_risk(shifted, beta) - (up + c)) <= 1e-9);
      CHECK(std::abs(risk_lower(shifted, beta) - (low + c)) <= 1e-9);
      prev_upper = up;
      prev_lower = low;
    }
    CHECK(std::abs(entropic_risk(v, 1e-8) - mean) <= 1e-6);
  }
}
