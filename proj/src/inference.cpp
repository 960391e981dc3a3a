#include "aif/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aif/errors.hpp"
#include "aif/prob.hpp"

namespace aif {
namespace {

void check_belief(const GenerativeModel& model, std::span<const double> belief,
                  const char* what) {
  if (belief.size() != model.num_states()) {
    throw ShapeError(std::string(what) + ": belief has " + std::to_string(belief.size()) +
                     " entries, model has " + std::to_string(model.num_states()) +
                     " joint states");
  }
}

void check_action(const GenerativeModel& model, Index action) {
  if (action >= model.num_actions()) {
    throw IndexError("action " + std::to_string(action) + " out of range");
  }
}

std::vector<double> normalize_or_throw(std::vector<double> v, const char* what) {
  const double total = sum(v);
  if (!(total > 0.0)) {
    throw AllZeroPosterior(std::string(what) +
                           ": observation has zero probability under the predictive prior");
  }
  for (double& x : v) x /= total;
  return v;
}

// Contracts `v` with B^f along each factor axis. Forward computes
// out[.., j, ..] = sum_k B[a][k][j] v[.., k, ..]; backward computes
// out[.., k, ..] = sum_j B[a][k][j] v[.., j, ..].
std::vector<double> contract_transitions(const GenerativeModel& model, std::span<const double> v,
                                         Index action, bool forward) {
  const auto& fs = model.states.factor_sizes();
  std::vector<double> cur(v.begin(), v.end());
  std::vector<double> next(cur.size());
  std::size_t stride = cur.size();
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const std::size_t n = fs[f];
    stride /= n;
    const std::size_t block = n * stride;
    const double* table = model.B.tables[f].data() + action * n * n;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t outer = 0; outer < cur.size(); outer += block) {
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
          const double p = table[k * n + j];
          if (p == 0.0) continue;
          const std::size_t src = outer + (forward ? k : j) * stride;
          const std::size_t dst = outer + (forward ? j : k) * stride;
          for (std::size_t i = 0; i < stride; ++i) next[dst + i] += p * cur[src + i];
        }
      }
    }
    cur.swap(next);
  }
  return cur;
}

}  // namespace

void History::check(const GenerativeModel& model) const {
  const int t_now = t();
  if (t_now < 1 || t_now > model.horizon) {
    throw InvalidArgument("history: need 1 <= t <= T, got t = " + std::to_string(t_now));
  }
  if (actions.size() + 1 != observations.size()) {
    throw InvalidArgument("history: expected " + std::to_string(t_now - 1) + " actions, got " +
                          std::to_string(actions.size()));
  }
  for (Index o : observations) {
    if (o >= model.num_observations()) throw IndexError("history: observation out of range");
  }
  for (Index a : actions) check_action(model, a);
}

Belief propagate(const GenerativeModel& model, std::span<const double> belief, Index action) {
  check_belief(model, belief, "propagate");
  check_action(model, action);
  return contract_transitions(model, belief, action, true);
}

Belief filter_step(const GenerativeModel& model, std::span<const double> prior,
                   std::optional<Index> action, Index observation) {
  check_belief(model, prior, "filter_step");
  Belief predicted = action ? propagate(model, prior, *action) : Belief(prior.begin(), prior.end());
  return condition_on_observation(model, predicted, observation);
}

Belief filter_history(const GenerativeModel& model, const History& history) {
  history.check(model);
  Belief belief = filter_step(model, joint_initial_prior(model), std::nullopt,
                              history.observations.front());
  for (std::size_t k = 1; k < history.observations.size(); ++k) {
    belief = filter_step(model, belief, history.actions[k - 1], history.observations[k]);
  }
  return belief;
}

std::vector<Belief> predict_state(const GenerativeModel& model, std::span<const double> belief,
                                  std::span<const Index> actions) {
  check_belief(model, belief, "predict_state");
  if (actions.empty()) throw InvalidArgument("predict_state: need at least one action");
  std::vector<Belief> out;
  out.reserve(actions.size());
  Belief cur(belief.begin(), belief.end());
  for (Index a : actions) {
    cur = propagate(model, cur, a);
    out.push_back(cur);
  }
  return out;
}

Belief condition_on_observation(const GenerativeModel& model, std::span<const double> predicted,
                                Index observation) {
  check_belief(model, predicted, "condition_on_observation");
  auto lik = likelihood_over_states(model, observation);
  for (std::size_t s = 0; s < lik.size(); ++s) lik[s] *= predicted[s];
  return normalize_or_throw(std::move(lik), "condition_on_observation");
}

std::vector<double> predict_observation(const GenerativeModel& model,
                                        std::span<const double> belief) {
  check_belief(model, belief, "predict_observation");
  const auto& ms = model.observations.modality_sizes();
  const std::size_t n_obs = model.num_observations();
  std::vector<double> out(n_obs, 0.0);
  // Outer product of the per-modality columns of each state, weighted by q(s).
  std::vector<double> column;
  for (std::size_t s = 0; s < belief.size(); ++s) {
    if (belief[s] == 0.0) continue;
    column.assign(1, belief[s]);
    for (std::size_t m = 0; m < ms.size(); ++m) {
      const double* a = model.A.tables[m].data() + s * ms[m];
      std::vector<double> grown(column.size() * ms[m]);
      for (std::size_t i = 0; i < column.size(); ++i) {
        for (std::size_t k = 0; k < ms[m]; ++k) grown[i * ms[m] + k] = column[i] * a[k];
      }
      column.swap(grown);
    }
    for (std::size_t o = 0; o < n_obs; ++o) out[o] += column[o];
  }
  return out;
}

FactorBeliefs factor_marginals(const GenerativeModel& model, std::span<const double> belief) {
  check_belief(model, belief, "factor_marginals");
  const auto& fs = model.states.factor_sizes();
  FactorBeliefs out(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) out[f].assign(fs[f], 0.0);
  for (std::size_t s = 0; s < belief.size(); ++s) {
    Index rest = s;
    for (std::size_t f = fs.size(); f-- > 0;) {
      out[f][rest % fs[f]] += belief[s];
      rest /= fs[f];
    }
  }
  return out;
}

Belief joint_from_factors(const GenerativeModel& model, const FactorBeliefs& factors) {
  const auto& fs = model.states.factor_sizes();
  if (factors.size() != fs.size()) throw ShapeError("joint_from_factors: factor count mismatch");
  Belief out(model.num_states(), 1.0);
  for (std::size_t s = 0; s < out.size(); ++s) {
    Index rest = s;
    for (std::size_t f = fs.size(); f-- > 0;) {
      out[s] *= factors[f].at(rest % fs[f]);
      rest /= fs[f];
    }
  }
  return out;
}

SmoothedPosterior smooth(const GenerativeModel& model, const History& history,
                         std::span<const Index> future_actions, SmoothOptions options) {
  history.check(model);
  const int t_now = history.t();
  const int horizon = model.horizon;
  if (static_cast<int>(future_actions.size()) != horizon - t_now) {
    throw InvalidArgument("smooth: expected " + std::to_string(horizon - t_now) +
                          " future actions, got " + std::to_string(future_actions.size()));
  }
  std::vector<Index> actions = history.actions;
  for (Index a : future_actions) {
    check_action(model, a);
    actions.push_back(a);
  }

  const std::size_t n = model.num_states();
  const auto steps = static_cast<std::size_t>(horizon);
  std::vector<std::vector<double>> evidence(steps, std::vector<double>(n, 1.0));
  for (int tau = 1; tau <= t_now; ++tau) {
    evidence[tau - 1] = likelihood_over_states(model, history.observations[tau - 1]);
  }

  // Forward pass, normalized at each step.
  std::vector<std::vector<double>> fwd(steps);
  fwd[0] = joint_initial_prior(model);
  for (std::size_t k = 0; k < steps; ++k) {
    if (k > 0) fwd[k] = propagate(model, fwd[k - 1], actions[k - 1]);
    for (std::size_t s = 0; s < n; ++s) fwd[k][s] *= evidence[k][s];
    fwd[k] = normalize_or_throw(std::move(fwd[k]), "smooth");
  }

  // Backward pass: bwd[k](s) proportional to p(o_{k+2..t} | s_{k+1} = s).
  std::vector<std::vector<double>> bwd(steps, std::vector<double>(n, 1.0));
  for (std::size_t k = steps - 1; k-- > 0;) {
    std::vector<double> msg(n);
    for (std::size_t s = 0; s < n; ++s) msg[s] = evidence[k + 1][s] * bwd[k + 1][s];
    bwd[k] = contract_transitions(model, msg, actions[k], false);
    const double total = sum(bwd[k]);
    if (!(total > 0.0)) throw AllZeroPosterior("smooth: history has zero probability");
    for (double& x : bwd[k]) x /= total;
  }

  SmoothedPosterior out;
  out.marginals.resize(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<double> m(n);
    for (std::size_t s = 0; s < n; ++s) m[s] = fwd[k][s] * bwd[k][s];
    out.marginals[k] = normalize_or_throw(std::move(m), "smooth");
  }

  if (options.pairwise) {
    out.pairwise.resize(steps - 1);
    for (std::size_t k = 1; k < steps; ++k) {
      std::vector<double> joint(n * n, 0.0);
      for (std::size_t next = 0; next < n; ++next) {
        const double right = evidence[k][next] * bwd[k][next];
        if (right == 0.0) continue;
        for (std::size_t prev = 0; prev < n; ++prev) {
          if (fwd[k - 1][prev] == 0.0) continue;
          joint[next * n + prev] =
              fwd[k - 1][prev] * joint_transition(model, next, prev, actions[k - 1]) * right;
        }
      }
      out.pairwise[k - 1] = normalize_or_throw(std::move(joint), "smooth");
    }
  }
  return out;
}

FactorizedResult filter_step_factorized(const GenerativeModel& model, const FactorBeliefs& prior,
                                        std::optional<Index> action, Index observation,
                                        FixedPointOptions options) {
  const auto& fs = model.states.factor_sizes();
  if (prior.size() != fs.size()) throw ShapeError("filter_step_factorized: factor count mismatch");
  for (std::size_t f = 0; f < fs.size(); ++f) {
    if (prior[f].size() != fs[f]) throw ShapeError("filter_step_factorized: factor size mismatch");
  }
  if (options.max_sweeps < 1) throw InvalidArgument("filter_step_factorized: need max_sweeps >= 1");
  if (action) check_action(model, *action);

  // Per-factor predictive priors [B^f q_prev^f].
  FactorBeliefs predicted(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) {
    if (!action) {
      predicted[f] = prior[f];
      continue;
    }
    const std::size_t n = fs[f];
    predicted[f].assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        predicted[f][j] += model.B.at(f, *action, k, j, n) * prior[f][k];
      }
    }
  }

  const auto lik = likelihood_over_states(model, observation);
  FactorBeliefs q = predicted;
  double residual = 0.0;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    residual = 0.0;
    for (std::size_t f = 0; f < fs.size(); ++f) {
      // message(s^f) = sum over the other factors of q(s^\f) p(o | s).
      std::vector<double> message(fs[f], 0.0);
      for (std::size_t s = 0; s < lik.size(); ++s) {
        if (lik[s] == 0.0) continue;
        double w = lik[s];
        Index rest = s;
        Index own = 0;
        for (std::size_t g = fs.size(); g-- > 0;) {
          const Index c = rest % fs[g];
          rest /= fs[g];
          if (g == f) {
            own = c;
          } else {
            w *= q[g][c];
          }
        }
        message[own] += w;
      }
      for (std::size_t j = 0; j < fs[f]; ++j) message[j] *= predicted[f][j];
      auto updated = normalize_or_throw(std::move(message), "filter_step_factorized");
      for (std::size_t j = 0; j < fs[f]; ++j) {
        residual = std::max(residual, std::abs(updated[j] - q[f][j]));
      }
      q[f] = std::move(updated);
    }
    if (residual < options.tolerance) return {std::move(q), sweep, residual};
  }
  throw NonConvergence(std::move(q), residual, options.max_sweeps);
}

}  // namespace aif
