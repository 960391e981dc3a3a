#include "aif/varfree.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <string>

#include "aif/errors.hpp"
#include "aif/prob.hpp"

namespace aif {
namespace {

using boost::math::digamma;

void check_distribution(std::span<const double> p, std::size_t size, const char* what) {
  if (p.size() != size) throw ShapeError(std::string(what) + ": size mismatch");
  for (double v : p) {
    if (!(v >= 0.0)) throw InvalidArgument(std::string(what) + ": negative probability");
  }
  if (std::abs(sum(p) - 1.0) > 1e-9) throw InvalidArgument(std::string(what) + ": not normalized");
}

// E[ln theta_i] under Dir(alpha) for each block of `width` entries.
std::vector<double> expected_log(std::span<const double> alpha, std::size_t width) {
  std::vector<double> out(alpha.size());
  for (std::size_t start = 0; start < alpha.size(); start += width) {
    double total = 0.0;
    for (std::size_t i = 0; i < width; ++i) total += alpha[start + i];
    const double psi_total = digamma(total);
    for (std::size_t i = 0; i < width; ++i) out[start + i] = digamma(alpha[start + i]) - psi_total;
  }
  return out;
}

}  // namespace

void CategoricalLatentModel::check() const {
  if (latents == 0 || outcomes == 0) throw InvalidArgument("latent model: empty spaces");
  if (theta_D.size() != latents || alpha_D.size() != latents) {
    throw ShapeError("latent model: theta_D / alpha_D size mismatch");
  }
  if (theta_A.size() != latents * outcomes || alpha_A.size() != latents * outcomes) {
    throw ShapeError("latent model: theta_A / alpha_A size mismatch");
  }
  check_distribution(theta_D, latents, "latent model theta_D");
  for (std::size_t j = 0; j < latents; ++j) {
    check_distribution(std::span(theta_A).subspan(j * outcomes, outcomes), outcomes,
                       "latent model theta_A column");
  }
  for (double a : alpha_D) {
    if (!(a > 0.0)) throw InvalidArgument("latent model: alpha_D entries must be > 0");
  }
  for (double a : alpha_A) {
    if (!(a > 0.0)) throw InvalidArgument("latent model: alpha_A entries must be > 0");
  }
}

std::vector<double> exact_posterior(const CategoricalLatentModel& model, Index x) {
  model.check();
  if (x >= model.outcomes) throw IndexError("exact_posterior: observation out of range");
  std::vector<double> joint(model.latents);
  for (std::size_t z = 0; z < model.latents; ++z) joint[z] = model.likelihood(x, z) * model.theta_D[z];
  return normalized(joint);
}

VfeValue vfe(std::span<const double> q, const CategoricalLatentModel& model, Index x) {
  model.check();
  if (x >= model.outcomes) throw IndexError("vfe: observation out of range");
  check_distribution(q, model.latents, "vfe q");

  double evidence = 0.0;
  for (std::size_t z = 0; z < model.latents; ++z) evidence += model.likelihood(x, z) * model.theta_D[z];

  VfeValue out;
  for (std::size_t z = 0; z < model.latents; ++z) {
    if (q[z] <= 0.0) continue;
    const double joint = model.likelihood(x, z) * model.theta_D[z];
    out.F += q[z] * (std::log(q[z]) - safe_log(joint));
    out.kl_to_posterior += q[z] * (std::log(q[z]) - safe_log(joint / evidence));
  }
  out.neg_log_evidence = -safe_log(evidence);
  return out;
}

double generalized_vfe(std::span<const double> q, std::span<const double> f) {
  if (q.size() != f.size()) throw ShapeError("generalized_vfe: size mismatch");
  double acc = 0.0;
  for (std::size_t z = 0; z < q.size(); ++z) {
    if (q[z] > 0.0) acc += q[z] * (std::log(q[z]) - f[z]);
  }
  return acc;
}

std::vector<double> exact_minimizer(std::span<const double> f) { return softmax(f); }

double dirichlet_kl(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ShapeError("dirichlet_kl: size mismatch");
  const double a0 = sum(a);
  const double b0 = sum(b);
  double kl = std::lgamma(a0) - std::lgamma(b0);
  const double psi_a0 = digamma(a0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    kl += std::lgamma(b[i]) - std::lgamma(a[i]) + (a[i] - b[i]) * (digamma(a[i]) - psi_a0);
  }
  return kl;
}

double cavi_free_energy(const CategoricalLatentModel& model, Index x, std::span<const double> q_z,
                        const LatentDirichlet& q_theta) {
  const std::size_t m = model.latents;
  const std::size_t n = model.outcomes;
  const auto elog_d = expected_log(q_theta.alpha_D, m);
  const auto elog_a = expected_log(q_theta.alpha_A, n);
  double f = 0.0;
  for (std::size_t z = 0; z < m; ++z) {
    if (q_z[z] > 0.0) f += q_z[z] * std::log(q_z[z]);
    f -= q_z[z] * (elog_a[z * n + x] + elog_d[z]);
  }
  f += dirichlet_kl(q_theta.alpha_D, model.alpha_D);
  for (std::size_t z = 0; z < m; ++z) {
    f += dirichlet_kl(std::span(q_theta.alpha_A).subspan(z * n, n),
                      std::span(model.alpha_A).subspan(z * n, n));
  }
  return f;
}

CaviResult cavi(const CategoricalLatentModel& model, Index x, int sweeps) {
  model.check();
  if (x >= model.outcomes) throw IndexError("cavi: observation out of range");
  if (sweeps < 1) throw InvalidArgument("cavi: need at least one sweep");
  const std::size_t m = model.latents;
  const std::size_t n = model.outcomes;

  CaviResult out;
  out.q_theta = {model.alpha_D, model.alpha_A};
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    // q(z) ~ exp(E_q(theta)[ln p(x, z | theta)]).
    const auto elog_d = expected_log(out.q_theta.alpha_D, m);
    const auto elog_a = expected_log(out.q_theta.alpha_A, n);
    std::vector<double> logits(m);
    for (std::size_t z = 0; z < m; ++z) logits[z] = elog_a[z * n + x] + elog_d[z];
    out.q_z = softmax(logits);
    out.f_trace.push_back(cavi_free_energy(model, x, out.q_z, out.q_theta));

    // q(theta) = Dir(alpha + sufficient statistics under q(z)).
    out.q_theta = {model.alpha_D, model.alpha_A};
    for (std::size_t z = 0; z < m; ++z) {
      out.q_theta.alpha_D[z] += out.q_z[z];
      out.q_theta.alpha_A[z * n + x] += out.q_z[z];
    }
    out.f_trace.push_back(cavi_free_energy(model, x, out.q_z, out.q_theta));
  }
  return out;
}

ThetaPosteriorMoments exact_theta_posterior_moments(const CategoricalLatentModel& model, Index x) {
  model.check();
  if (model.latents > kExactMomentsLimit || model.outcomes > kExactMomentsLimit) {
    throw InvalidArgument("exact_theta_posterior_moments: m and n must be <= " +
                          std::to_string(kExactMomentsLimit));
  }
  if (x >= model.outcomes) throw IndexError("exact_theta_posterior_moments: observation out of range");
  const std::size_t m = model.latents;
  const std::size_t n = model.outcomes;
  const double d0 = sum(model.alpha_D);
  std::vector<double> a0(m);
  for (std::size_t z = 0; z < m; ++z) a0[z] = sum(std::span(model.alpha_A).subspan(z * n, n));

  // Component j carries the unit increments of latent value j; its weight is
  // the prior expectation E[theta_A[x, j] theta_D[j]] (independent factors).
  std::vector<double> weights(m);
  for (std::size_t j = 0; j < m; ++j) {
    weights[j] = (model.alpha_A[j * n + x] / a0[j]) * (model.alpha_D[j] / d0);
  }
  ThetaPosteriorMoments out;
  out.mixture_weights = normalized(weights);

  out.mean_D.assign(m, 0.0);
  out.mean_A.assign(m * n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double w = out.mixture_weights[j];
    for (std::size_t z = 0; z < m; ++z) {
      out.mean_D[z] += w * (model.alpha_D[z] + (z == j ? 1.0 : 0.0)) / (d0 + 1.0);
      const double denom = a0[z] + (z == j ? 1.0 : 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double bump = (z == j && i == x) ? 1.0 : 0.0;
        out.mean_A[z * n + i] += w * (model.alpha_A[z * n + i] + bump) / denom;
      }
    }
  }
  return out;
}

DirichletParams pomdp_theta_step(const DirichletParams& alpha, const GenerativeModel& shape,
                                 const std::vector<Belief>& marginals, const History& history) {
  check_alpha(alpha, shape);
  history.check(shape);
  if (history.t() != shape.horizon) throw InvalidArgument("pomdp_theta_step: history must be complete");
  const auto steps = static_cast<std::size_t>(shape.horizon);
  if (marginals.size() != steps) throw ShapeError("pomdp_theta_step: one marginal per step needed");
  const std::size_t n = shape.num_states();
  double paths = 1.0;
  for (std::size_t k = 0; k < steps; ++k) paths *= static_cast<double>(n);
  if (paths > static_cast<double>(1u << 20)) {
    throw InvalidArgument("pomdp_theta_step: too many state paths to enumerate");
  }

  const auto& fs = shape.states.factor_sizes();
  const auto& ms = shape.observations.modality_sizes();
  std::vector<std::vector<Index>> obs_coords(steps);
  for (std::size_t k = 0; k < steps; ++k) obs_coords[k] = shape.observations.unflatten(history.observations[k]);
  std::vector<std::vector<Index>> state_coords(n);
  for (std::size_t s = 0; s < n; ++s) state_coords[s] = shape.states.unflatten(s);

  DirichletParams out = alpha;
  std::vector<Index> path(steps, 0);
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < steps && w != 0.0; ++k) w *= marginals[k][path[k]];
    if (w != 0.0) {
      // ln p(o, s | theta) = ln D(s_1) + sum ln A(o | s) + sum ln B(s' | s, a).
      for (std::size_t f = 0; f < fs.size(); ++f) out.alpha_D[f][state_coords[path[0]][f]] += w;
      for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t m = 0; m < ms.size(); ++m) {
          out.alpha_A[m][path[k] * ms[m] + obs_coords[k][m]] += w;
        }
      }
      for (std::size_t k = 1; k < steps; ++k) {
        const Index a = history.actions[k - 1];
        for (std::size_t f = 0; f < fs.size(); ++f) {
          const Index prev = state_coords[path[k - 1]][f];
          const Index next = state_coords[path[k]][f];
          out.alpha_B[f][(a * fs[f] + prev) * fs[f] + next] += w;
        }
      }
    }
    std::size_t k = steps;
    while (k-- > 0) {
      if (++path[k] < n) break;
      path[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

DirichletParams pomdp_cavi_first_sweep(const DirichletParams& alpha, const GenerativeModel& shape,
                                       const History& history) {
  const GenerativeModel current = model_from_alpha(alpha, shape);
  const auto smoothed = smooth(current, history, {}, SmoothOptions{false});
  return pomdp_theta_step(alpha, shape, smoothed.marginals, history);
}

}  // namespace aif
