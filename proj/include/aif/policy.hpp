#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aif/efe.hpp"
#include "aif/inference.hpp"
#include "aif/model.hpp"
#include "aif/prob.hpp"

namespace aif {

inline constexpr std::size_t kDefaultPolicyCap = 1'000'000;

// Every action sequence of length T - t in lexicographic order, first slot
// varying slowest. Throws CombinatorialLimit past `cap` policies.
std::vector<Policy> enumerate_policies(std::size_t action_count, int t, int horizon,
                                       std::size_t cap = kDefaultPolicyCap);

// Habit prior E. Either one weight per policy, or one per first action that is
// broadcast to every policy starting with it.
struct HabitPrior {
  enum class Scope { kPerPolicy, kPerFirstAction };
  Scope scope = Scope::kPerPolicy;
  std::vector<double> weights;
};

struct PolicyPosterior {
  std::vector<Policy> policies;
  std::vector<double> probabilities;
  std::vector<double> g;
  std::vector<EfeBreakdown> breakdowns;
  // ln E(pi) relative to the largest habit weight; empty without a habit.
  std::vector<double> habit_log_weights;
};

struct PolicyOptions {
  EfeForm form = EfeForm::kEpistemic;
  std::size_t cap = kDefaultPolicyCap;
};

// q(pi) = softmax(ln E(pi) - G(pi)) over every policy from t = history.t().
PolicyPosterior policy_posterior(const GenerativeModel& model, std::span<const double> belief_now,
                                 const History& history,
                                 const std::optional<HabitPrior>& habit = std::nullopt,
                                 PolicyOptions options = {});

// Categorical draw from the posterior with a generator seeded by `seed`.
const Policy& sample_policy(const PolicyPosterior& posterior, std::uint64_t seed);

// First action of a sampled policy. Throws InvalidArgument for an empty policy.
Index select_action(const PolicyPosterior& posterior, std::uint64_t seed);

// First action of the most probable policy; ties go to the lowest index.
Index greedy_action(const PolicyPosterior& posterior);

std::size_t argmax_policy(std::span<const double> probabilities);

}  // namespace aif
