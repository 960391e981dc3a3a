#pragma once

#include <span>
#include <vector>

#include "aif/inference.hpp"
#include "aif/model.hpp"

namespace aif {

// Actions a_t .. a_{T-1}, chosen at time `start`.
struct Policy {
  std::vector<Index> actions;
  int start = 1;

  bool operator==(const Policy&) const = default;
};

// Terms of one future step tau, all in nats. Each evaluation route fills
// the terms it computes; the rest are NaN (see EfeBreakdown::merge).
struct EfeStep {
  int tau = 0;
  double epistemic_value;
  double utility;
  double ambiguity;
  double risk;
  // ln Z of raw (unnormalized) preferences; 0 when C is normalized.
  double preference_shift = 0.0;
  double g = 0.0;
};

enum class EfeForm { kEpistemic, kAmbiguity };

struct EfeBreakdown {
  EfeForm form = EfeForm::kEpistemic;
  std::vector<EfeStep> steps;
  double total = 0.0;

  // Fills the terms this breakdown lacks from one computed by the other form.
  // `total` and each `g` stay those of *this.
  EfeBreakdown merge(const EfeBreakdown& other) const;
};

// G_tau = -(E_q(o)[KL(q(s|o) || q(s))] + E_q(o)[ln p_C(o)]), summed over
// tau = t+1..T under the mean-field treatment of future steps.
EfeBreakdown efe_epistemic_form(const GenerativeModel& model, std::span<const double> belief_now,
                                const Policy& policy);

// G_tau = E_q(s)[H[p(o|s)]] + KL(q(o) || p_C) - preference_shift.
EfeBreakdown efe_ambiguity_form(const GenerativeModel& model, std::span<const double> belief_now,
                                const Policy& policy);

EfeBreakdown expected_free_energy(const GenerativeModel& model,
                                  std::span<const double> belief_now, const Policy& policy,
                                  EfeForm form);

}  // namespace aif
