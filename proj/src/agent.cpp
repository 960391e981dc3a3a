#include "aif/agent.hpp"

#include "aif/errors.hpp"

namespace aif {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double realized_utility(const GenerativeModel& model, const History& history) {
  double acc = 0.0;
  for (int tau = 1; tau <= history.t(); ++tau) {
    const auto log_c = log_preferences(model, tau);
    acc += log_c[history.observations[tau - 1]] - preference_log_normalizer(model, tau);
  }
  return acc;
}

namespace {

class BeliefTracker {
 public:
  BeliefTracker(const GenerativeModel& model, const AgentOptions& options)
      : model_(model), options_(options) {
    factorized_ = options.inference == InferenceMode::kFactorized ||
                  (options.inference == InferenceMode::kAuto &&
                   model.num_states() > kExactJointLimit);
    if (factorized_) {
      factors_ = model.D.factors;
    } else {
      joint_ = joint_initial_prior(model);
    }
  }

  // Returns false when the fixed point did not converge; the last iterate
  // is used in that case.
  bool update(std::optional<Index> action, Index observation) {
    if (!factorized_) {
      joint_ = filter_step(model_, joint_, action, observation);
      return true;
    }
    bool converged = true;
    try {
      factors_ = filter_step_factorized(model_, factors_, action, observation, options_.fixed_point)
                     .beliefs;
    } catch (const NonConvergence& e) {
      factors_ = e.last_iterate();
      converged = false;
    }
    joint_ = joint_from_factors(model_, factors_);
    return converged;
  }

  const Belief& joint() const { return joint_; }

 private:
  const GenerativeModel& model_;
  const AgentOptions& options_;
  bool factorized_ = false;
  Belief joint_;
  FactorBeliefs factors_;
};

}  // namespace

EpisodeRecord run_episode(const GenerativeModel& model, Environment& env, int episode,
                          std::uint64_t seed, const AgentOptions& options) {
  EpisodeRecord rec;
  rec.episode = episode;
  rec.seed = seed;

  BeliefTracker tracker(model, options);
  Index observation = env.reset(seed);
  std::optional<Index> last_action;
  for (int t = 1; t <= model.horizon; ++t) {
    rec.history.observations.push_back(observation);
    StepRecord step;
    step.t = t;
    step.observation = observation;
    step.true_state = env.state();
    step.converged = tracker.update(last_action, observation);
    step.belief = tracker.joint();

    PolicyOptions popts{options.form, options.policy_cap};
    step.posterior = policy_posterior(model, step.belief, rec.history,
                                      t < model.horizon ? options.habit : std::nullopt, popts);
    // The other evaluation route fills in the remaining terms of the log.
    const EfeForm other =
        options.form == EfeForm::kEpistemic ? EfeForm::kAmbiguity : EfeForm::kEpistemic;
    for (std::size_t i = 0; i < step.posterior.policies.size(); ++i) {
      auto& b = step.posterior.breakdowns[i];
      b = b.merge(expected_free_energy(model, step.belief, step.posterior.policies[i], other));
    }

    if (t < model.horizon) {
      const Index action = options.mode == SelectionMode::kGreedy
                               ? greedy_action(step.posterior)
                               : select_action(step.posterior, derive_seed(seed, static_cast<std::uint64_t>(t)));
      step.action = action;
      rec.history.actions.push_back(action);
      last_action = action;
    }
    rec.steps.push_back(std::move(step));
    if (t < model.horizon) observation = env.step(*last_action);
  }
  rec.realized_utility = realized_utility(model, rec.history);
  return rec;
}

}  // namespace aif
