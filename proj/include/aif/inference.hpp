#pragma once

#include <optional>
#include <span>
#include <vector>

#include "aif/model.hpp"

namespace aif {

// Probability vector over joint states.
using Belief = std::vector<double>;
// One probability vector per state factor.
using FactorBeliefs = std::vector<std::vector<double>>;

// What the agent has seen and done so far: o_1..o_t and a_1..a_{t-1}.
struct History {
  std::vector<Index> observations;
  std::vector<Index> actions;

  int t() const noexcept { return static_cast<int>(observations.size()); }
  // Throws InvalidArgument / IndexError if the history does not fit the model.
  void check(const GenerativeModel& model) const;
};

// One-step prediction: sum_{s'} p(s | s', action) belief(s'). Applied factor
// by factor, so the joint transition matrix is never materialized.
Belief propagate(const GenerativeModel& model, std::span<const double> belief, Index action);

// q(s_t | o_1:t, a_1:t-1). With no action the prior is used as is (t = 1, the
// prior is D); otherwise it is first propagated through B. Throws
// AllZeroPosterior for an impossible observation.
Belief filter_step(const GenerativeModel& model, std::span<const double> prior,
                   std::optional<Index> action, Index observation);

// Filters a whole history starting from the joint D.
Belief filter_history(const GenerativeModel& model, const History& history);

// Beliefs for each of the |actions| future steps, without conditioning.
std::vector<Belief> predict_state(const GenerativeModel& model, std::span<const double> belief,
                                  std::span<const Index> actions);

// q(s | o) proportional to p(o | s) q(s).
Belief condition_on_observation(const GenerativeModel& model, std::span<const double> predicted,
                                Index observation);

// q(o) = sum_s p(o | s) q(s), over joint observations.
std::vector<double> predict_observation(const GenerativeModel& model,
                                        std::span<const double> belief);

FactorBeliefs factor_marginals(const GenerativeModel& model, std::span<const double> belief);
Belief joint_from_factors(const GenerativeModel& model, const FactorBeliefs& factors);

struct SmoothedPosterior {
  // marginals[tau - 1] = q_T(s_tau), tau = 1..T.
  std::vector<Belief> marginals;
  // pairwise[tau - 2][next * N + prev] = q_T(s_tau = next, s_{tau-1} = prev),
  // tau = 2..T. Empty when not requested.
  std::vector<std::vector<double>> pairwise;
};

struct SmoothOptions {
  bool pairwise = true;
};

// Forward-backward over the joint state. Observations condition steps
// 1..t; steps t+1..T only follow `future_actions`, which must have length T - t.
SmoothedPosterior smooth(const GenerativeModel& model, const History& history,
                         std::span<const Index> future_actions, SmoothOptions options = {});

struct FixedPointOptions {
  int max_sweeps = 50;
  double tolerance = 1e-8;
};

struct FactorizedResult {
  FactorBeliefs beliefs;
  int sweeps = 0;
  double residual = 0.0;
};

// Mean-field filtering: iterates
//   q(s^f) ~ sum_{s^\f} q(s^\f) p(o | s) [B^f q_prev^f](s^f)
// sweeping factors in ascending order until the largest change in a sweep is
// below the tolerance. Throws NonConvergence (with the last iterate) when the
// sweep budget runs out first.
FactorizedResult filter_step_factorized(const GenerativeModel& model, const FactorBeliefs& prior,
                                        std::optional<Index> action, Index observation,
                                        FixedPointOptions options = {});

}  // namespace aif
