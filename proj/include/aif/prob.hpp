#pragma once

#include <span>
#include <vector>

namespace aif {

// Floor applied inside every logarithm so exact zeros never produce -inf.
inline constexpr double kProbFloor = 1e-16;

double safe_log(double p);

// Returns p / sum(p). Throws AllZeroPosterior if the vector has no mass.
std::vector<double> normalized(std::span<const double> weights);

// Shannon entropy in nats, with 0 ln 0 = 0.
double entropy(std::span<const double> p);

// KL(p || q) in nats. Throws SupportViolation when p has mass (above the
// floor) where q does not.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// sigma(x)_i = exp(x_i) / sum_j exp(x_j), evaluated with max-subtraction.
// Entries equal to -inf get probability zero. Throws InvalidArgument on empty
// input or when no entry is finite.
std::vector<double> softmax(std::span<const double> values);

double log_sum_exp(std::span<const double> values);

double sum(std::span<const double> values);

}  // namespace aif
