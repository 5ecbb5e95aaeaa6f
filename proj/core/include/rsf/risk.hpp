#pragma once

#include <span>

namespace rsf {

/// Entropic (exponential) risk of a sampled random variable,
///   R_beta[C] = (1/beta) log E[exp(beta C)],
/// evaluated with a max shift so beta * max(values) up to ~700 does not overflow.
/// beta == 0 is the risk-neutral case and returns the sample mean.
/// Throws ContractError on an empty sample, negative beta or non-finite values.
double entropic_risk(std::span<const double> values, double beta);

/// Lower certainty equivalent -R_beta[-values]; lies between the sample minimum and the mean.
double risk_lower(std::span<const double> values, double beta);

}  // namespace rsf
