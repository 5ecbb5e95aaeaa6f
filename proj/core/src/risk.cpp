#include "rsf/risk.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rsf/error.hpp"

namespace rsf {

namespace {

void check_inputs(std::span<const double> values, double beta) {
  if (values.empty()) throw ContractError("risk measure of an empty sample set");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ContractError("risk parameter beta must be finite and >= 0");
  for (double v : values) {
    if (!std::isfinite(v)) throw ContractError("risk measure of a non-finite sample");
  }
}

double mean_of(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

// (1/beta) log mean exp(beta * sign * v), sign = +1 or -1. The max shift is taken on
// the unscaled values so the result never exceeds max(sign * v); summing expm1 of
// the shifted exponents keeps the small-beta limit accurate.
double shifted_log_mean_exp(std::span<const double> values, double beta, double sign) {
  double top = -INFINITY;
  for (double v : values) top = std::max(top, sign * v);
  double acc = 0.0;
  for (double v : values) acc += std::expm1(beta * (sign * v - top));
  const double n = static_cast<double>(values.size());
  return top + std::log1p(acc / n) / beta;
}

}  // namespace

double entropic_risk(std::span<const double> values, double beta) {
  check_inputs(values, beta);
  if (beta == 0.0) return mean_of(values);
  return shifted_log_mean_exp(values, beta, 1.0);
}

double risk_lower(std::span<const double> values, double beta) {
  check_inputs(values, beta);
  if (beta == 0.0) return mean_of(values);
  return -shifted_log_mean_exp(values, beta, -1.0);
}

}  // namespace rsf
