#include "aif/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "aif/errors.hpp"

namespace aif {

std::vector<Policy> enumerate_policies(std::size_t action_count, int t, int horizon,
                                       std::size_t cap) {
  if (t < 1 || t > horizon) throw InvalidArgument("enumerate_policies: need 1 <= t <= T");
  if (action_count < 1) throw InvalidArgument("enumerate_policies: need at least one action");
  const auto length = static_cast<std::size_t>(horizon - t);
  std::size_t count = 1;
  for (std::size_t k = 0; k < length; ++k) {
    if (count > cap / action_count) {
      throw CombinatorialLimit("enumerate_policies: " + std::to_string(action_count) + "^" +
                               std::to_string(length) + " policies exceed the cap of " +
                               std::to_string(cap));
    }
    count *= action_count;
  }
  if (count > cap) throw CombinatorialLimit("enumerate_policies: policy count exceeds the cap");

  std::vector<Policy> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].start = t;
    out[i].actions.resize(length);
    std::size_t rest = i;
    for (std::size_t k = length; k-- > 0;) {
      out[i].actions[k] = rest % action_count;
      rest /= action_count;
    }
  }
  return out;
}

PolicyPosterior policy_posterior(const GenerativeModel& model, std::span<const double> belief_now,
                                 const History& history, const std::optional<HabitPrior>& habit,
                                 PolicyOptions options) {
  history.check(model);
  PolicyPosterior out;
  out.policies = enumerate_policies(model.num_actions(), history.t(), model.horizon, options.cap);
  const std::size_t n = out.policies.size();

  std::vector<double> log_habit(n, 0.0);
  if (habit) {
    const auto& w = habit->weights;
    const bool per_policy = habit->scope == HabitPrior::Scope::kPerPolicy;
    const std::size_t expected = per_policy ? n : model.num_actions();
    if (w.size() != expected) {
      throw ShapeError("habit prior: expected " + std::to_string(expected) + " weights, got " +
                       std::to_string(w.size()));
    }
    if (!per_policy && history.t() == model.horizon) {
      throw InvalidArgument("habit prior: no first action to broadcast over at t = T");
    }
    double top = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidArgument("habit prior: weights must be finite and non-negative");
      }
      top = std::max(top, v);
    }
    if (!(top > 0.0)) throw InvalidArgument("habit prior: at least one weight must be positive");
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = per_policy ? w[i] : w[out.policies[i].actions.front()];
      // Relative to the largest weight, so a uniform habit is exactly zero.
      log_habit[i] = wi > 0.0 ? std::log(wi / top) : -std::numeric_limits<double>::infinity();
    }
    out.habit_log_weights = log_habit;
  }

  out.g.resize(n);
  out.breakdowns.reserve(n);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.breakdowns.push_back(expected_free_energy(model, belief_now, out.policies[i], options.form));
    out.g[i] = out.breakdowns.back().total;
    scores[i] = log_habit[i] - out.g[i];
  }
  out.probabilities = softmax(scores);
  return out;
}

const Policy& sample_policy(const PolicyPosterior& posterior, std::uint64_t seed) {
  const auto& p = posterior.probabilities;
  if (p.empty() || p.size() != posterior.policies.size()) {
    throw InvalidArgument("sample_policy: empty or inconsistent posterior");
  }
  std::mt19937_64 gen(seed);
  // 53 random bits mapped to [0, 1); identical across standard libraries.
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = i;
    acc += p[i];
    if (u < acc) return posterior.policies[i];
  }
  return posterior.policies[last_positive];
}

Index select_action(const PolicyPosterior& posterior, std::uint64_t seed) {
  const Policy& chosen = sample_policy(posterior, seed);
  if (chosen.actions.empty()) throw InvalidArgument("select_action: policy has no actions left");
  return chosen.actions.front();
}

std::size_t argmax_policy(std::span<const double> probabilities) {
  if (probabilities.empty()) throw InvalidArgument("argmax_policy: empty posterior");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probabilities.size(); ++i) {
    if (probabilities[i] > probabilities[best]) best = i;
  }
  return best;
}

Index greedy_action(const PolicyPosterior& posterior) {
  const Policy& chosen = posterior.policies.at(argmax_policy(posterior.probabilities));
  if (chosen.actions.empty()) throw InvalidArgument("greedy_action: policy has no actions left");
  return chosen.actions.front();
}

}  // namespace aif
