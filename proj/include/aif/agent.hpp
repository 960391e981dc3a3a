#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aif/efe.hpp"
#include "aif/env.hpp"
#include "aif/inference.hpp"
#include "aif/learning.hpp"
#include "aif/model.hpp"
#include "aif/policy.hpp"

namespace aif {

enum class SelectionMode { kSample, kGreedy };

enum class InferenceMode {
  kAuto,        // exact up to kExactJointLimit joint states, factorized beyond
  kExact,
  kFactorized,
};

inline constexpr std::size_t kExactJointLimit = 4096;

struct AgentOptions {
  SelectionMode mode = SelectionMode::kGreedy;
  EfeForm form = EfeForm::kEpistemic;
  InferenceMode inference = InferenceMode::kAuto;
  std::optional<HabitPrior> habit;
  std::size_t policy_cap = kDefaultPolicyCap;
  FixedPointOptions fixed_point;
  LearningOptions learning;
};

struct StepRecord {
  int t = 0;
  Index observation = 0;
  Index true_state = 0;
  Belief belief;
  // False when factorized filtering stopped on its sweep budget.
  bool converged = true;
  PolicyPosterior posterior;
  std::optional<Index> action;
};

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  History history;
  // sum_tau ln p_C(o_tau) with normalized preferences.
  double realized_utility = 0.0;
  std::optional<DirichletParams> alpha_before;
  std::optional<DirichletParams> alpha_after;
};

// Perception -> expected free energy -> selection -> action, for one episode.
// Action sampling at step t uses derive_seed(seed, t).
EpisodeRecord run_episode(const GenerativeModel& model, Environment& env, int episode,
                          std::uint64_t seed, const AgentOptions& options);

// sum_tau ln p_C(o_tau) with normalized preferences.
double realized_utility(const GenerativeModel& model, const History& history);

// Deterministic seed mixing (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace aif
