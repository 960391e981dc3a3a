#include "aif/efe.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "aif/errors.hpp"
#include "aif/prob.hpp"

namespace aif {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_policy(const GenerativeModel& model, std::span<const double> belief_now,
                  const Policy& policy) {
  if (belief_now.size() != model.num_states()) throw ShapeError("efe: belief size mismatch");
  if (policy.start < 1 || policy.start > model.horizon) {
    throw InvalidArgument("efe: policy start must lie in [1, T]");
  }
  if (static_cast<int>(policy.actions.size()) != model.horizon - policy.start) {
    throw InvalidArgument("efe: a policy starting at t = " + std::to_string(policy.start) +
                          " must hold " + std::to_string(model.horizon - policy.start) +
                          " actions");
  }
  for (Index a : policy.actions) {
    if (a >= model.num_actions()) throw IndexError("efe: action out of range");
  }
}

EfeStep blank_step(int tau) {
  return EfeStep{tau, kNaN, kNaN, kNaN, kNaN, 0.0, 0.0};
}

// Expected entropy of p(o | s) over joint observations. Modalities are
// conditionally independent, so the joint entropy is the sum per modality.
double expected_ambiguity(const GenerativeModel& model, std::span<const double> q_s) {
  const auto& ms = model.observations.modality_sizes();
  double acc = 0.0;
  for (std::size_t s = 0; s < q_s.size(); ++s) {
    if (q_s[s] == 0.0) continue;
    double h = 0.0;
    for (std::size_t m = 0; m < ms.size(); ++m) {
      h += entropy(std::span(model.A.tables[m]).subspan(s * ms[m], ms[m]));
    }
    acc += q_s[s] * h;
  }
  return acc;
}

}  // namespace

EfeBreakdown EfeBreakdown::merge(const EfeBreakdown& other) const {
  EfeBreakdown out = *this;
  for (std::size_t k = 0; k < out.steps.size() && k < other.steps.size(); ++k) {
    auto& s = out.steps[k];
    const auto& o = other.steps[k];
    if (std::isnan(s.epistemic_value)) s.epistemic_value = o.epistemic_value;
    if (std::isnan(s.utility)) s.utility = o.utility;
    if (std::isnan(s.ambiguity)) s.ambiguity = o.ambiguity;
    if (std::isnan(s.risk)) s.risk = o.risk;
  }
  return out;
}

EfeBreakdown efe_epistemic_form(const GenerativeModel& model, std::span<const double> belief_now,
                                const Policy& policy) {
  check_policy(model, belief_now, policy);
  EfeBreakdown out;
  out.form = EfeForm::kEpistemic;
  Belief q_s(belief_now.begin(), belief_now.end());
  int tau = policy.start;
  for (Index a : policy.actions) {
    ++tau;
    q_s = propagate(model, q_s, a);
    const auto q_o = predict_observation(model, q_s);
    const auto log_c = log_preferences(model, tau);

    double epistemic = 0.0;
    double utility = 0.0;
    for (std::size_t o = 0; o < q_o.size(); ++o) {
      if (q_o[o] <= kProbFloor) continue;
      const auto posterior = condition_on_observation(model, q_s, o);
      double kl = 0.0;
      for (std::size_t s = 0; s < posterior.size(); ++s) {
        if (posterior[s] > 0.0) kl += posterior[s] * (std::log(posterior[s]) - std::log(q_s[s]));
      }
      epistemic += q_o[o] * kl;
      utility += q_o[o] * log_c[o];
    }

    EfeStep step = blank_step(tau);
    step.epistemic_value = epistemic;
    step.utility = utility;
    step.preference_shift = preference_log_normalizer(model, tau);
    step.g = -(epistemic + utility);
    out.total += step.g;
    out.steps.push_back(step);
  }
  return out;
}

EfeBreakdown efe_ambiguity_form(const GenerativeModel& model, std::span<const double> belief_now,
                                const Policy& policy) {
  check_policy(model, belief_now, policy);
  EfeBreakdown out;
  out.form = EfeForm::kAmbiguity;
  Belief q_s(belief_now.begin(), belief_now.end());
  int tau = policy.start;
  for (Index a : policy.actions) {
    ++tau;
    q_s = propagate(model, q_s, a);
    const auto q_o = predict_observation(model, q_s);
    const double shift = preference_log_normalizer(model, tau);
    // Normalized ln p_C, so the risk is a proper KL divergence.
    auto log_c = log_preferences(model, tau);
    for (double& v : log_c) v -= shift;

    double risk = 0.0;
    for (std::size_t o = 0; o < q_o.size(); ++o) {
      if (q_o[o] <= kProbFloor) continue;
      risk += q_o[o] * (std::log(q_o[o]) - log_c[o]);
    }

    EfeStep step = blank_step(tau);
    step.ambiguity = expected_ambiguity(model, q_s);
    step.risk = risk;
    step.preference_shift = shift;
    step.g = step.ambiguity + step.risk - shift;
    out.total += step.g;
    out.steps.push_back(step);
  }
  return out;
}

EfeBreakdown expected_free_energy(const GenerativeModel& model,
                                  std::span<const double> belief_now, const Policy& policy,
                                  EfeForm form) {
  return form == EfeForm::kEpistemic ? efe_epistemic_form(model, belief_now, policy)
                                     : efe_ambiguity_form(model, belief_now, policy);
}

}  // namespace aif
