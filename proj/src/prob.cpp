#include "aif/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "aif/errors.hpp"

namespace aif {

NonConvergence::NonConvergence(std::vector<std::vector<double>> last_iterate, double residual,
                               int sweeps)
    : Error("fixed-point iteration did not converge after " + std::to_string(sweeps) +
            " sweeps (residual " + std::to_string(residual) + ")"),
      last_iterate_(std::move(last_iterate)),
      residual_(residual),
      sweeps_(sweeps) {}

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

double sum(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

std::vector<double> normalized(std::span<const double> weights) {
  const double total = sum(weights);
  if (!(total > 0.0)) throw AllZeroPosterior("cannot normalize a vector with zero total mass");
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w /= total;
  return out;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double pi : p) {
    if (pi > 0.0) h -= pi * std::log(pi);
  }
  return h;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeError("kl_divergence: size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= kProbFloor) {
      if (p[i] > kProbFloor) {
        throw SupportViolation("kl_divergence: p[" + std::to_string(i) +
                               "] > 0 where q is zero");
      }
      continue;
    }
    kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return std::max(kl, 0.0);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("log_sum_exp of an empty vector");
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

std::vector<double> softmax(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("softmax of an empty vector");
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) throw InvalidArgument("softmax needs at least one finite value");
  std::vector<double> out(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(values[i] - m);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace aif
